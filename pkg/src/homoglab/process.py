"""Normalized cell energies and the interval-indexed subadditive process.

``X(spec)`` is the minimal interfacial energy in ``R_{t,ell}^nu`` divided
by ``t^{d-1}``; ``mu(I, ...)`` is the unnormalized minimal energy on the
cuboid over the (d-1)-interval ``I`` with height ``min(ell, s_max(I))``.
The ``check_*`` helpers evaluate the structural inequalities on a single
realization and return a :class:`Witness`.

Discrete minima are exact for the quantized costs, so every comparison
allows the sum of the reported quantization bounds as slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .cell import CellProblemSpec, PhaseSet, TWO_PHASES, discretize, discretize_box, energy, pure_jump_labeling
from .errors import ParameterError
from .fields import FieldInstance, FieldModel, instantiate
from .solver import SolveResult, solve

__all__ = [
    "Interval",
    "ProcessValue",
    "Witness",
    "X",
    "mu",
    "check_monotone_ell",
    "check_almost_monotone_t",
    "check_subadditive",
    "planelike_gap",
]


@dataclass(frozen=True)
class Interval:
    """Half-open box ``[p, q)`` in R^{d-1}."""

    p: tuple[float, ...]
    q: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(v) for v in np.atleast_1d(self.p))
        q = tuple(float(v) for v in np.atleast_1d(self.q))
        if len(p) != len(q) or not all(a < b for a, b in zip(p, q)):
            raise ParameterError(f"empty or malformed interval [{p}, {q})")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def s_max(self) -> float:
        return max(b - a for a, b in zip(self.p, self.q))

    @property
    def measure(self) -> float:
        return math.prod(b - a for a, b in zip(self.p, self.q))

    def translate(self, z) -> "Interval":
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        return Interval(tuple(np.add(self.p, z)), tuple(np.add(self.q, z)))

    @classmethod
    def centred_cube(cls, t: float, dim: int) -> "Interval":
        return cls((-t / 2,) * dim, (t / 2,) * dim)


@dataclass
class ProcessValue:
    """Normalized minimal energy of one cell problem."""

    value: float
    spec: CellProblemSpec
    solver: str
    quantization_error: float
    exact: bool
    result: SolveResult | None = None

    def __float__(self) -> float:
        return self.value


@dataclass
class Witness:
    """Outcome of one structural check; truthy when the inequality holds."""

    holds: bool
    lhs: float
    rhs: float
    slack: float = 0.0

    def __bool__(self) -> bool:
        return bool(self.holds)


def X(spec: CellProblemSpec, keep_result: bool = False) -> ProcessValue:
    """``t^{1-d} * min energy`` over admissible labelings of ``R_{t,ell}^nu``."""
    inst = discretize(spec)
    res = solve(inst)
    scale = spec.t ** (spec.d - 1)
    return ProcessValue(
        value=res.value / scale,
        spec=spec,
        solver=res.method,
        quantization_error=res.quantization_error / scale,
        exact=res.exact,
        result=res if keep_result else None,
    )


def _mu_box(I: Interval, ell: float):
    height = I.s_max if math.isinf(ell) else min(ell, I.s_max)
    lower = list(I.p) + [-height / 2]
    upper = list(I.q) + [height / 2]
    return lower, upper, height


def mu_result(
    I: Interval,
    ell: float,
    nu,
    field: FieldInstance,
    h: float,
    a: int = 0,
    b: int = 1,
    phases: PhaseSet = TWO_PHASES,
    stencil: str = "axis",
) -> SolveResult:
    if len(I.p) != field.d - 1:
        raise ParameterError("interval dimension must be d - 1")
    lower, upper, _ = _mu_box(I, ell)
    inst = discretize_box(lower, upper, nu, field, h, a=a, b=b, phases=phases, stencil=stencil)
    return solve(inst)


def mu(
    I: Interval,
    ell: float,
    nu,
    field: FieldInstance,
    h: float,
    a: int = 0,
    b: int = 1,
    phases: PhaseSet = TWO_PHASES,
    stencil: str = "axis",
) -> float:
    """Minimal energy on ``O_nu(int I x min(ell, s_max(I)) (-1/2, 1/2))``.

    ``ell = math.inf`` gives the height ``s_max(I)``.
    """
    return mu_result(I, ell, nu, field, h, a, b, phases, stencil).value


def pure_jump_energy(I: Interval, ell: float, nu, field: FieldInstance, h: float, a: int = 0, b: int = 1) -> float:
    """Energy of the boundary datum itself on the cuboid over ``I``."""
    lower, upper, _ = _mu_box(I, ell)
    inst = discretize_box(lower, upper, nu, field, h, a=a, b=b)
    return energy(pure_jump_labeling(inst), inst)


def check_monotone_ell(spec: CellProblemSpec, ell2: float) -> Witness:
    """``X_{t,ell2} <= X_{t,ell}`` for ``ell2 >= ell`` on the same field."""
    if not spec.ell <= ell2 <= spec.t:
        raise ParameterError("need ell <= ell2 <= t")
    lo = X(spec)
    hi = X(spec.with_(ell=ell2))
    slack = lo.quantization_error + hi.quantization_error
    return Witness(hi.value <= lo.value + slack, hi.value, lo.value, slack)


def check_almost_monotone_t(spec: CellProblemSpec, t2: float) -> Witness:
    """``X_{t2,ell} <= X_{t,ell} + c c_phi (t2 - t) / t2`` for ``t2 >= t``.

    In d = 3 the filler term is ``c c_phi (1 - (t/t2)^2)``, which is what
    the extension argument gives there.
    """
    if t2 < spec.t:
        raise ParameterError("need t2 >= t")
    model = spec.field.model
    c = model.c * model.c_phi
    small = X(spec)
    big = X(spec.with_(t=t2))
    d = spec.d
    if d == 2:
        penalty = c * (t2 - spec.t) / t2
    else:
        penalty = c * (1.0 - (spec.t / t2) ** (d - 1))
    slack = small.quantization_error + big.quantization_error
    rhs = small.value + penalty
    return Witness(big.value <= rhs + slack, big.value, rhs, slack)


def _check_partition(I: Interval, parts: Sequence[Interval]) -> None:
    tol = 1e-9 * max(1.0, I.measure)
    for J in parts:
        if any(a < pa - 1e-12 or b > qb + 1e-12 for a, b, pa, qb in zip(J.p, J.q, I.p, I.q)):
            raise ParameterError(f"part {J} is not inside {I}")
    for J, K in ((J, K) for n, J in enumerate(parts) for K in parts[n + 1:]):
        overlap = math.prod(max(0.0, min(b1, b2) - max(a1, a2)) for a1, b1, a2, b2 in zip(J.p, J.q, K.p, K.q))
        if overlap > tol:
            raise ParameterError(f"parts {J} and {K} overlap")
    if abs(sum(J.measure for J in parts) - I.measure) > tol:
        raise ParameterError("parts do not cover the interval")


def check_subadditive(
    I: Interval,
    parts: Sequence[Interval],
    ell: float,
    nu,
    field: FieldInstance,
    h: float,
    a: int = 0,
    b: int = 1,
) -> Witness:
    """``mu(I) <= sum_i mu(I_i)`` for a partition of ``I``.

    Cell rows of every cuboid must line up, so all heights need the same
    parity in units of ``h``.
    """
    _check_partition(I, parts)
    heights = [_mu_box(J, ell)[2] for J in [I, *parts]]
    parity = {round(hgt / h) % 2 for hgt in heights}
    if len(parity) > 1:
        raise ParameterError("part heights do not share the grid parity of the whole")
    whole = mu_result(I, ell, nu, field, h, a, b)
    pieces = [mu_result(J, ell, nu, field, h, a, b) for J in parts]
    total = math.fsum(r.value for r in pieces)
    slack = whole.quantization_error + sum(r.quantization_error for r in pieces)
    return Witness(whole.value <= total + slack, whole.value, total, slack)


@dataclass(frozen=True)
class GapRow:
    seed: int
    t: float
    x_fixed: float
    x_full: float

    @property
    def gap(self) -> float:
        return self.x_fixed - self.x_full


def planelike_gap(
    model: FieldModel,
    ell_fixed: float,
    ts: Iterable[float],
    seeds: Iterable[int],
    h: float = 0.5,
    nu=None,
) -> list[GapRow]:
    """``X_{t,ell_fixed} - X_{t,t}`` per seed and side length."""
    nu = tuple(nu) if nu is not None else (0.0,) * (model.d - 1) + (1.0,)
    rows = []
    for seed in seeds:
        f = instantiate(model, seed)
        for t in ts:
            spec = CellProblemSpec(t, ell_fixed, nu, f, h=h)
            rows.append(GapRow(int(seed), float(t), X(spec).value, X(spec.with_(ell=t)).value))
    return rows
