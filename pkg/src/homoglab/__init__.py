"""Numerical cell formulas for interfacial energies in random media.

Seeded stationary surface tensions (:mod:`~homoglab.fields`), exact
min-cut cell problems (:mod:`~homoglab.cell`, :mod:`~homoglab.solver`),
the normalized energies ``X_{t,ell}`` and the subadditive process ``mu``
(:mod:`~homoglab.process`), Monte Carlo fluctuation statistics
(:mod:`~homoglab.stats`) and the stripe-medium oracle
(:mod:`~homoglab.oracle`).

Basic example
-------------

.. code:: python

    from homoglab import FieldModel, CellProblemSpec, instantiate, X

    field = instantiate(FieldModel.stripe(), seed=3)
    X(CellProblemSpec(t=64, ell=8, nu=(0.0, 1.0), field=field, h=0.5)).value
"""

__version__ = "0.1.0"

from .cell import CellProblemSpec, CutInstance, PhaseSet, discretize, energy, frame, pure_jump
from .errors import ArityError, ContractError, HomoglabError, ParameterError, SizeError
from .fields import AnisotropyProfile, FieldInstance, FieldModel, evaluate, instantiate, shift
from .process import Interval, X, mu
from .solver import SolveResult, solve, solve_exhaustive, solve_multiphase, solve_two_phase

__all__ = [
    "AnisotropyProfile",
    "ArityError",
    "CellProblemSpec",
    "ContractError",
    "CutInstance",
    "FieldInstance",
    "FieldModel",
    "HomoglabError",
    "Interval",
    "ParameterError",
    "PhaseSet",
    "SizeError",
    "SolveResult",
    "X",
    "discretize",
    "energy",
    "evaluate",
    "frame",
    "instantiate",
    "mu",
    "pure_jump",
    "shift",
    "solve",
    "solve_exhaustive",
    "solve_multiphase",
    "solve_two_phase",
]
