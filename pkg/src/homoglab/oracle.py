"""Closed-form ground truth for the planar stripe medium.

Slab ``(i - 1, i]`` carries an iid uniform weight ``w_i``.  With
``Y_l = min(w_i : -l + 1 <= i <= l)`` the stripe cell energies satisfy,
for every realization,

    Y_l <= X_{t,2l} <= Y_l + 4 l / t,

so ``X_{t,2l} -> Y_l`` while ``X_{t,t} -> 1``.  Weights come from
:func:`homoglab.fields.stripe_weights`, the same code path the field uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fields import FieldModel, stripe_weights
from .rng import hash_counters

__all__ = [
    "StripeRealization",
    "Y",
    "Y_many",
    "exceedance",
    "competitor_bound",
    "g_hom_stripe",
    "replicate_seeds",
    "exceedance_mc",
]


@dataclass(frozen=True)
class StripeRealization:
    seed: int
    lo: float = 1.0
    hi: float = 2.0

    @classmethod
    def of(cls, model: FieldModel, seed: int) -> "StripeRealization":
        if model.kind != "stripe":
            raise ParameterError("oracle only covers the stripe medium")
        return cls(int(seed), model.lo, model.hi)

    def weights(self, indices) -> np.ndarray:
        return stripe_weights(self.seed, indices, self.lo, self.hi)

    def window(self, ell: int, shift: int = 0) -> np.ndarray:
        """Weights of slabs ``-ell + 1 + shift .. ell + shift``."""
        return self.weights(np.arange(-ell + 1, ell + 1) + shift)


def Y(real: StripeRealization, ell: int, shift: int = 0) -> float:
    """Smallest slab weight in the window ``[-ell + 1, ell]`` (optionally shifted)."""
    if int(ell) != ell or ell < 1:
        raise ParameterError(f"ell must be a positive integer, got {ell}")
    return float(real.window(int(ell), shift).min())


def Y_many(seeds, ell: int, lo: float = 1.0, hi: float = 2.0) -> np.ndarray:
    """``Y_ell`` for many seeds at once."""
    if int(ell) != ell or ell < 1:
        raise ParameterError(f"ell must be a positive integer, got {ell}")
    seeds = np.asarray(seeds, dtype=np.uint64)
    idx = np.arange(-ell + 1, ell + 1, dtype=np.int64)
    out = np.full(seeds.size, np.inf)
    for i in idx:
        out = np.minimum(out, stripe_weights(seeds, np.full(seeds.size, i), lo, hi))
    return out


def exceedance(ell: int, s: float) -> float:
    """``P(Y_ell > s) = (2 - s)^(2 ell)`` for uniform [1, 2] weights."""
    if ell < 1:
        raise ParameterError("ell must be >= 1")
    if not 1.0 <= s <= 2.0:
        raise ParameterError(f"s must lie in [1, 2], got {s}")
    return (2.0 - s) ** (2 * ell)


def competitor_bound(real: StripeRealization, ell: int, t: float) -> float:
    """Energy of the detour competitor, relaxed to ``t Y_ell + 4 ell``.

    Bounds ``t * X_{t,2 ell}`` from above; the ``4 ell`` term assumes weights
    at most 2.
    """
    return t * Y(real, ell) + 4.0 * ell


def g_hom_stripe() -> float:
    """Homogenized surface tension of the stripe medium in direction e_2."""
    return 1.0


def replicate_seeds(base_seed: int, n: int) -> np.ndarray:
    """``mix_seed(base_seed, r)`` for ``r = 0 .. n-1``, vectorized."""
    return hash_counters(np.uint64(base_seed), np.arange(n, dtype=np.uint64))


def exceedance_mc(ell: int, s: float, n_seeds: int, base_seed: int = 0) -> tuple[float, float, float]:
    """Monte Carlo frequency of ``Y_ell > s`` against the closed form.

    Returns ``(empirical, analytic, sigma)`` with ``sigma`` the binomial
    standard error of the empirical frequency under the analytic law.
    """
    y = Y_many(replicate_seeds(base_seed, n_seeds), ell)
    p = exceedance(ell, s)
    return float(np.mean(y > s)), p, float(np.sqrt(p * (1 - p) / n_seeds))
