"""Stateless counter-based random numbers.

Every draw is a pure function of ``(seed, counters...)``: the 64-bit key
is folded through the SplitMix64 finalizer once per counter.  This lets a
random medium be evaluated lazily at any lattice index, in any order, and
from any thread, without storing anything.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _u64(x) -> np.ndarray:
    a = np.asarray(x)
    if a.dtype == np.uint64:
        return a
    if a.dtype.kind in "iu":
        return a.astype(np.int64).view(np.uint64) if a.dtype.kind == "i" else a.astype(np.uint64)
    if a.dtype == object or a.dtype.kind == "f":
        return np.asarray(np.vectorize(lambda v: int(v) & _MASK64, otypes=[np.uint64])(a))
    raise TypeError(f"cannot use {a.dtype} as a counter")


def mix64(x) -> np.ndarray:
    """SplitMix64 finalizer, elementwise on ``uint64`` arrays."""
    z = _u64(x).astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def hash_counters(seed, *counters) -> np.ndarray:
    """64-bit hash of ``seed`` and integer counters (broadcast together)."""
    with np.errstate(over="ignore"):
        h = mix64(_u64(seed) + _GAMMA)
        for c in counters:
            h = mix64(h ^ (_u64(c) + _GAMMA))
    return h


def uniform(seed, *counters) -> np.ndarray:
    """Uniform floats in [0, 1) with 53 random bits."""
    bits = hash_counters(seed, *counters) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 9007199254740992.0)


def mix_seed(base_seed: int, index: int) -> int:
    """Derive the seed of replicate ``index`` from ``base_seed``.

    ``mix_seed(b, i) = splitmix64(splitmix64(b + gamma) ^ (i + gamma))``.
    """
    return int(hash_counters(np.uint64(base_seed & _MASK64), np.uint64(index & _MASK64)))
