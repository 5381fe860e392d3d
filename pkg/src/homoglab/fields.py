"""Seeded stationary random surface tensions.

A field is the product ``g(x, zeta, nu) = a(x) * phi(nu)`` of a scalar
random weight ``a`` living on unit lattice cells (or slabs, or around
Poisson centres) and a deterministic even anisotropy ``phi``.  Weights are
drawn from :mod:`homoglab.rng` keyed by ``(seed, index)`` so a realization
exists on all of R^d without storage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import poisson

from . import rng
from .errors import ContractError, ParameterError

__all__ = [
    "AnisotropyProfile",
    "FieldModel",
    "FieldInstance",
    "instantiate",
    "evaluate",
    "evaluate_many",
    "shift",
    "stripe_weights",
    "checkerboard_weights",
]

KINDS = ("constant", "stripe", "checkerboard", "poisson")

# stream tags keep the lattice models' draws independent of each other
_STRIPE_STREAM = 0x5354524950
_CHECKER_STREAM = 0x434845434B
_POISSON_STREAM = 0x504F4953

UNIT_TOL = 1e-12
# lookup points are rounded to multiples of 2^-40 so that round-off from
# rotations and offsets cannot flip which unit cell a face point falls in
SNAP = float(2**40)


@dataclass(frozen=True)
class AnisotropyProfile:
    """Even normal-dependent factor ``phi``.

    ``isotropic`` is identically 1; ``onenorm`` is ``|nu|_1 / |nu|_2``
    clamped into ``[1, sqrt(d)]``.
    """

    kind: str = "isotropic"

    def __post_init__(self):
        if self.kind not in ("isotropic", "onenorm"):
            raise ParameterError(f"unknown anisotropy {self.kind!r}")

    def bound(self, d: int) -> float:
        """The constant ``c_phi`` with ``1/c_phi <= phi <= c_phi``."""
        return 1.0 if self.kind == "isotropic" else math.sqrt(d)

    def __call__(self, normals: np.ndarray) -> np.ndarray:
        normals = np.atleast_2d(normals)
        if self.kind == "isotropic":
            return np.ones(normals.shape[0])
        d = normals.shape[1]
        r = np.abs(normals).sum(axis=1) / np.sqrt((normals * normals).sum(axis=1))
        return np.clip(r, 1.0, math.sqrt(d))


@dataclass(frozen=True)
class FieldModel:
    """Law of a random surface tension.

    Parameters not used by ``kind`` are ignored.  Use the classmethod
    constructors rather than filling fields by hand.
    """

    kind: str
    d: int = 2
    c: float = 2.0
    value: float = 1.0
    lo: float = 1.0
    hi: float = 2.0
    intensity: float = 1.0
    radius: float = 0.25
    background: float = 1.0
    inclusion: float = 2.0
    anisotropy: AnisotropyProfile = field(default_factory=AnisotropyProfile)

    @classmethod
    def constant(cls, value: float = 1.0, d: int = 2, c: float = 2.0, **kw) -> "FieldModel":
        return cls("constant", d=d, c=c, value=value, **kw)

    @classmethod
    def stripe(cls, lo: float = 1.0, hi: float = 2.0, d: int = 2, c: float = 2.0, **kw) -> "FieldModel":
        """Horizontal slabs ``(i - 1, i]`` in the last coordinate, iid uniform weights."""
        return cls("stripe", d=d, c=c, lo=lo, hi=hi, **kw)

    @classmethod
    def checkerboard(cls, lo: float = 1.0, hi: float = 2.0, d: int = 2, c: float = 2.0, **kw) -> "FieldModel":
        """iid uniform weight on each unit cell ``z + [0, 1)^d``."""
        return cls("checkerboard", d=d, c=c, lo=lo, hi=hi, **kw)

    @classmethod
    def poisson_inclusions(
        cls,
        intensity: float = 1.0,
        radius: float = 0.25,
        background: float = 1.0,
        inclusion: float = 2.0,
        d: int = 2,
        c: float = 2.0,
        **kw,
    ) -> "FieldModel":
        """Balls of ``radius`` around Poisson points of ``intensity`` per unit volume."""
        return cls(
            "poisson", d=d, c=c, intensity=intensity, radius=radius,
            background=background, inclusion=inclusion, **kw,
        )

    @property
    def c_phi(self) -> float:
        return self.anisotropy.bound(self.d)

    def weight_range(self) -> tuple[float, float]:
        if self.kind == "constant":
            return self.value, self.value
        if self.kind in ("stripe", "checkerboard"):
            return self.lo, self.hi
        return min(self.background, self.inclusion), max(self.background, self.inclusion)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ParameterError(f"unknown field kind {self.kind!r}")
        if self.d not in (2, 3):
            raise ParameterError(f"dimension must be 2 or 3, got {self.d}")
        if not self.c >= 1.0:
            raise ParameterError(f"ellipticity bound c must be >= 1, got {self.c}")
        if self.kind in ("stripe", "checkerboard") and self.lo > self.hi:
            raise ParameterError(f"lo > hi ({self.lo} > {self.hi})")
        if self.kind == "poisson":
            if not self.intensity > 0:
                raise ParameterError(f"Poisson intensity must be > 0, got {self.intensity}")
            if not self.radius > 0:
                raise ParameterError(f"inclusion radius must be > 0, got {self.radius}")
        lo, hi = self.weight_range()
        tol = 1e-12
        if lo < 1.0 / self.c - tol or hi > self.c + tol:
            raise ParameterError(f"weights [{lo}, {hi}] outside [1/c, c] with c = {self.c}")


@dataclass(frozen=True)
class FieldInstance:
    """One realization ``omega`` of a :class:`FieldModel`, optionally shifted.

    Immutable; evaluation is a pure function of ``(model, seed, offset, x, nu)``.
    """

    model: FieldModel
    seed: int
    offset: tuple[float, ...]

    @property
    def d(self) -> int:
        return self.model.d


def instantiate(model: FieldModel, seed: int) -> FieldInstance:
    model.validate()
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return FieldInstance(model, seed, (0.0,) * model.d)


def shift(f: FieldInstance, z) -> FieldInstance:
    """Translate the medium: ``evaluate(shift(f, z), x) == evaluate(f, x + z)``.

    Lattice models are only distributionally stationary under integer ``z``.
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    if z.size != f.d:
        raise ParameterError(f"shift needs a {f.d}-vector")
    return replace(f, offset=tuple(float(o) for o in np.asarray(f.offset) + z))


def stripe_weights(seed: int, index, lo: float = 1.0, hi: float = 2.0) -> np.ndarray:
    """Weight of slab ``(i - 1, i]`` for each integer ``i`` in ``index``."""
    idx = np.asarray(index, dtype=np.int64)
    return lo + (hi - lo) * rng.uniform(np.uint64(seed), _STRIPE_STREAM, idx)


def checkerboard_weights(seed: int, cells, lo: float = 1.0, hi: float = 2.0) -> np.ndarray:
    """Weight of unit cell ``z + [0, 1)^d`` for each row ``z`` of ``cells``."""
    cells = np.atleast_2d(np.asarray(cells, dtype=np.int64))
    return lo + (hi - lo) * rng.uniform(np.uint64(seed), _CHECKER_STREAM, *cells.T)


def _poisson_weights(model: FieldModel, seed: int, x: np.ndarray) -> np.ndarray:
    d = model.d
    r = model.radius
    # counts are capped at a quantile far in the tail so the loop is bounded
    kmax = int(poisson.ppf(1.0 - 1e-15, model.intensity))
    reach = int(math.ceil(r))
    base = np.floor(x).astype(np.int64)
    hit = np.zeros(x.shape[0], dtype=bool)
    offsets = np.stack(np.meshgrid(*([np.arange(-reach, reach + 1)] * d), indexing="ij"), -1).reshape(-1, d)
    key = np.uint64(seed)
    for off in offsets:
        cube = base + off
        cols = [cube[:, j] for j in range(d)]
        u = rng.uniform(key, _POISSON_STREAM, *cols, 0)
        count = np.minimum(poisson.ppf(u, model.intensity), kmax).astype(np.int64)
        for k in range(int(count.max(initial=0))):
            live = count > k
            if not live.any():
                break
            centre = np.empty((x.shape[0], d))
            for j in range(d):
                centre[:, j] = cube[:, j] + rng.uniform(key, _POISSON_STREAM, *cols, 1 + k * d + j)
            dist2 = ((x - centre) ** 2).sum(axis=1)
            hit |= live & (dist2 <= r * r)
    return np.where(hit, model.inclusion, model.background)


def weights(f: FieldInstance, points) -> np.ndarray:
    """Scalar weight ``a(x)`` at world points (offset applied)."""
    x = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if x.shape[1] != f.d:
        raise ParameterError(f"points must be {f.d}-dimensional")
    x = np.round((x + np.asarray(f.offset)) * SNAP) / SNAP
    m = f.model
    if m.kind == "constant":
        return np.full(x.shape[0], float(m.value))
    if m.kind == "stripe":
        return stripe_weights(f.seed, np.ceil(x[:, -1]).astype(np.int64), m.lo, m.hi)
    if m.kind == "checkerboard":
        return checkerboard_weights(f.seed, np.floor(x).astype(np.int64), m.lo, m.hi)
    return _poisson_weights(m, f.seed, x)


def _check_unit(normals: np.ndarray) -> None:
    norms = np.sqrt((normals * normals).sum(axis=1))
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise ContractError("normal vectors must have unit length")


def evaluate_many(f: FieldInstance, points, zeta, normals) -> np.ndarray:
    """Vectorized :func:`evaluate` over rows of ``points`` and ``normals``.

    The shipped models do not depend on the jump vector ``zeta``; it is
    accepted for interface symmetry.
    """
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    _check_unit(normals)
    return weights(f, points) * f.model.anisotropy(normals)


def evaluate(f: FieldInstance, x, zeta, nu) -> float:
    """Surface tension at ``x`` for jump ``zeta`` across normal ``nu``."""
    return float(evaluate_many(f, np.reshape(x, (1, -1)), zeta, np.reshape(nu, (1, -1)))[0])
