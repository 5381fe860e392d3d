"""
The stripe medium, step by step
===============================

Horizontal slabs carry iid uniform [1, 2] weights.  Flat cells of fixed
height stay stuck near the cheapest slab they can see, while tall cells
find ever cheaper slabs and drift towards 1.
"""

import numpy as np

from homoglab import CellProblemSpec, FieldModel, X, instantiate
from homoglab.oracle import StripeRealization, Y, exceedance, exceedance_mc

model = FieldModel.stripe()
seed = 17
field = instantiate(model, seed)
real = StripeRealization.of(model, seed)

# slab weights around the origin; slab i is (i - 1, i]
print("weights -3..4:", np.round(real.weights(np.arange(-3, 5)), 3))

# %% the sandwich Y_l <= X_{t,2l} <= Y_l + 4l/t
for ell0 in (1, 2, 4):
    for t in (32, 128):
        x = X(CellProblemSpec(t, 2 * ell0, (0.0, 1.0), field)).value
        y = Y(real, ell0)
        print(f"l0={ell0} t={t:4d}  Y={y:.4f}  X={x:.4f}  Y+4l/t={y + 4 * ell0 / t:.4f}")

# %% tall cells: X_{t,t} keeps decreasing, slowly
for t in (16, 32, 64, 128):
    print(f"X_{{{t},{t}}} = {X(CellProblemSpec(t, t, (0.0, 1.0), field)).value:.4f}")

# %% the law of Y_l, checked by Monte Carlo
for ell, s in ((1, 1.5), (4, 1.3)):
    emp, ana, sig = exceedance_mc(ell, s, 50_000)
    print(f"P(Y_{ell} > {s}): empirical {emp:.4f}, exact {ana:.4f} (sigma {sig:.4f})")
print("exceedance(2, 1.05) =", exceedance(2, 1.05))
