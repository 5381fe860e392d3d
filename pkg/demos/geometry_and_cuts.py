"""
From a box to a graph cut
=========================

A tilted cell problem, its grid, the minimizing labeling, and the
structural inequalities checked on one realization.
"""

import math

import numpy as np

from homoglab import CellProblemSpec, FieldModel, Interval, X, discretize, energy, frame, instantiate, mu
from homoglab.cell import pure_jump_labeling
from homoglab.process import check_almost_monotone_t, check_monotone_ell, check_subadditive

nu = (0.6, 0.8)
O = frame(nu).matrix
print("O_nu =\n", O, "\nO_nu e_2 =", O @ [0, 1])

field = instantiate(FieldModel.checkerboard(), 3)
spec = CellProblemSpec(t=12, ell=6, nu=nu, field=field, h=0.5)
inst = discretize(spec)
print("grid", inst.shape, "facets", inst.n_facets, "free cells", inst.free.size)

pv = X(spec, keep_result=True)
flat = energy(pure_jump_labeling(inst), inst) / spec.t
print(f"X = {pv.value:.4f}  (flat interface {flat:.4f}, quantization <= {pv.quantization_error:.1e})")

# rows from the top of the box downwards, 1 = phase b
print(pv.result.labeling.reshape(inst.shape).T[::-1])

# %% per-realization inequalities
print("decreasing in ell:", bool(check_monotone_ell(spec, 12)))
print("almost decreasing in t:", bool(check_almost_monotone_t(spec, 18)))
parts = [Interval((0.0,), (4.0,)), Interval((4.0,), (10.0,))]
print("subadditive:", bool(check_subadditive(Interval((0.0,), (10.0,)), parts, 6, nu, field, 0.5)))
print("mu_inf([0, 10)) =", round(mu(Interval((0.0,), (10.0,)), math.inf, nu, field, 0.5), 4))
