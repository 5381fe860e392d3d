"""Cell-problem geometry and its discretization into a facet-weighted grid.

Boxes are meshed in the rotated frame ``y = O_nu^T x`` where the normal
direction is the last axis, so every hyperrectangle is axis-aligned in
grid space and the one-cell boundary collar is exact.  Facet normals and
midpoints are mapped back through ``O_nu`` for field evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ContractError, ParameterError
from .fields import FieldInstance, evaluate_many

__all__ = [
    "Direction",
    "frame",
    "Hyperrect",
    "PhaseSet",
    "CellProblemSpec",
    "CutInstance",
    "pure_jump",
    "discretize",
    "discretize_box",
    "energy",
    "pure_jump_labeling",
]

STENCILS = ("axis", "extended")
SNAP = float(2**40)  # world coordinates are rounded to multiples of 1 / SNAP


@dataclass(frozen=True, eq=False)
class Direction:
    """Unit normal ``nu`` with its orthogonal frame (last column is ``nu``)."""

    nu: np.ndarray
    matrix: np.ndarray

    @property
    def d(self) -> int:
        return self.nu.size


def frame(nu) -> Direction:
    """Orthogonal frame from the reflection through ``nu + e_d``.

    ``O x = 2 <x, nu + e_d> / |nu + e_d|^2 (nu + e_d) - x``, and ``O = -Id``
    for ``nu = -e_d``.
    """
    nu = np.asarray(nu, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(nu) - 1.0) > 1e-12:
        raise ContractError("direction must be a unit vector")
    d = nu.size
    ed = np.zeros(d)
    ed[-1] = 1.0
    w = nu + ed
    ww = w @ w
    if ww == 0.0:
        mat = -np.eye(d)
    else:
        mat = 2.0 * np.outer(w, w) / ww - np.eye(d)
    return Direction(nu.copy(), mat)


@dataclass(frozen=True)
class Hyperrect:
    """``R_{t,ell}^nu``: side ``t`` across, height ``ell`` along ``nu``."""

    t: float
    ell: float
    direction: Direction

    def __post_init__(self):
        if not (0 < self.ell <= self.t):
            raise ParameterError(f"need 0 < ell <= t, got t={self.t}, ell={self.ell}")

    def contains(self, x) -> np.ndarray:
        y = np.atleast_2d(x) @ self.direction.matrix
        inside = np.abs(y[:, -1]) < self.ell / 2
        return inside & np.all(np.abs(y[:, :-1]) < self.t / 2, axis=1)


@dataclass(frozen=True, eq=False)
class PhaseSet:
    """Finite set of phase values in R^m (at least two, all distinct)."""

    points: np.ndarray

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] < 2:
            raise ParameterError("need at least two phases")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise ParameterError("phases must be distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def jump(self, p: int, q: int) -> np.ndarray:
        return self.points[q] - self.points[p]


TWO_PHASES = PhaseSet([0.0, 1.0])


@dataclass(frozen=True)
class CellProblemSpec:
    """Data of one cell problem ``X_{t,ell}^{a,b,nu}`` on a grid of spacing ``h``.

    ``a`` and ``b`` are indices into ``phases``.
    """

    t: float
    ell: float
    nu: tuple[float, ...]
    field: FieldInstance
    h: float = 0.5
    a: int = 0
    b: int = 1
    phases: PhaseSet = TWO_PHASES
    stencil: str = "axis"

    @property
    def d(self) -> int:
        return len(self.nu)

    @property
    def rect(self) -> Hyperrect:
        return Hyperrect(self.t, self.ell, frame(self.nu))

    def __post_init__(self):
        if self.a == self.b:
            raise ParameterError("boundary phases must differ")
        if not self.h > 0:
            raise ParameterError("grid spacing must be positive")

    def with_(self, **changes) -> "CellProblemSpec":
        return replace(self, **changes)


@dataclass(eq=False)
class CutInstance:
    """Discretized energy on a box grid.

    Cells are indexed in C order over ``shape``; the last axis runs along
    ``nu``; ``height[c]`` is the signed distance ``<x, nu>`` of cell centre
    ``c``.  ``cost[f, p, q]`` is the energy of facet ``f`` when its two
    cells carry phases ``p`` and ``q``; ``pins[c]`` is the forced phase of
    collar cell ``c`` or ``-1``.
    """

    shape: tuple[int, ...]
    h: float
    lower: np.ndarray
    direction: Direction
    centers: np.ndarray
    facet_cells: np.ndarray
    facet_mid: np.ndarray
    facet_normal: np.ndarray
    facet_area: np.ndarray
    cost: np.ndarray
    pins: np.ndarray
    height: np.ndarray
    a: int
    b: int
    n_phases: int
    meta: dict = field(default_factory=dict)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_facets(self) -> int:
        return self.facet_cells.shape[0]

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(self.pins < 0)


def pure_jump(x, x0, a, b, nu):
    """``b`` where ``<x - x0, nu> > 0`` and ``a`` elsewhere.

    Vectorized over rows of ``x``; returns a scalar for a single point.
    """
    x = np.asarray(x, dtype=np.float64)
    s = (x - np.asarray(x0, dtype=np.float64)) @ np.asarray(nu, dtype=np.float64)
    out = np.where(s > 0, b, a)
    return out.item() if out.ndim == 0 else out


def _grid_count(length: float, h: float, what: str) -> int:
    n = round(length / h)
    if n < 1 or abs(n * h - length) > 1e-9 * max(1.0, abs(length)):
        raise ParameterError(f"{what} = {length} is not a positive multiple of h = {h}")
    return int(n)


def _neighbour_offsets(d: int, stencil: str):
    """Offsets and Cauchy-Crofton length weights (relative to ``h^{d-1}``)."""
    axis = [tuple(int(i == k) for i in range(d)) for k in range(d)]
    if stencil == "axis" or d == 3:
        return axis, [1.0] * d
    # 8-neighbour planar stencil, angular spacing pi/4
    offs = [(1, 0), (0, 1), (1, 1), (1, -1)]
    wts = [math.pi / 8, math.pi / 8, math.pi / (8 * math.sqrt(2)), math.pi / (8 * math.sqrt(2))]
    return offs, wts


def _snap(x: np.ndarray) -> np.ndarray:
    # rotation round-off would otherwise decide which unit cell a point on a
    # cell face belongs to, breaking the (a, b, nu) -> (b, a, -nu) symmetry
    return np.round(x * SNAP) / SNAP


def discretize_box(
    lower: Sequence[float],
    upper: Sequence[float],
    nu,
    field: FieldInstance,
    h: float,
    a: int = 0,
    b: int = 1,
    phases: PhaseSet = TWO_PHASES,
    stencil: str = "axis",
) -> CutInstance:
    """Mesh the rotated box ``O_nu([lower, upper))`` with pure-jump collar pins."""
    if stencil not in STENCILS:
        raise ParameterError(f"unknown stencil {stencil!r}")
    if h <= 0:
        raise ParameterError("grid spacing must be positive")
    if a == b:
        raise ParameterError("boundary phases must differ")
    if not (0 <= a < len(phases) and 0 <= b < len(phases)):
        raise ParameterError("boundary phases out of range")
    direction = frame(nu)
    d = direction.d
    if field.d != d:
        raise ParameterError("field and direction dimensions differ")
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    shape = tuple(_grid_count(upper[k] - lower[k], h, f"box side {k}") for k in range(d))
    if shape[-1] < 2:
        raise ParameterError("the box must be at least two cells high along nu")

    O = direction.matrix
    grids = np.meshgrid(*[lower[k] + (np.arange(shape[k]) + 0.5) * h for k in range(d)], indexing="ij")
    y_centers = np.stack([g.ravel() for g in grids], axis=1)
    centers = _snap(y_centers @ O.T)
    flat = np.arange(int(np.prod(shape))).reshape(shape)

    collar = np.zeros(shape, dtype=bool)
    for k in range(d):
        sl = [slice(None)] * d
        sl[k] = 0
        collar[tuple(sl)] = True
        sl[k] = shape[k] - 1
        collar[tuple(sl)] = True
    # <x, nu> equals the last rotated coordinate
    jump = np.where(y_centers[:, -1] > 0, b, a)
    pins = np.where(collar.ravel(), jump, -1).astype(np.int64)

    offs, wts = _neighbour_offsets(d, stencil)
    cells, mids, normals, areas = [], [], [], []
    area_unit = h ** (d - 1)
    for off, wt in zip(offs, wts):
        off = np.asarray(off)
        src = tuple(slice(max(0, -o), s - max(0, o)) for o, s in zip(off, shape))
        dst = tuple(slice(max(0, o), s - max(0, -o)) for o, s in zip(off, shape))
        i = flat[src].ravel()
        j = flat[dst].ravel()
        if i.size == 0:
            continue
        cells.append(np.stack([i, j], axis=1))
        mids.append(_snap(0.5 * (y_centers[i] + y_centers[j]) @ O.T))
        n_y = off / np.linalg.norm(off)
        normals.append(np.broadcast_to(O @ n_y, (i.size, d)))
        areas.append(np.full(i.size, wt * area_unit))
    if cells:
        facet_cells = np.concatenate(cells)
        facet_mid = np.concatenate(mids)
        facet_normal = np.ascontiguousarray(np.concatenate(normals))
        facet_area = np.concatenate(areas)
    else:
        facet_cells = np.zeros((0, 2), dtype=np.int64)
        facet_mid = np.zeros((0, d))
        facet_normal = np.zeros((0, d))
        facet_area = np.zeros(0)

    P = len(phases)
    cost = np.zeros((facet_cells.shape[0], P, P))
    for p in range(P):
        for q in range(p + 1, P):
            g = evaluate_many(field, facet_mid, phases.jump(p, q), facet_normal) if facet_area.size else facet_area
            cost[:, p, q] = cost[:, q, p] = facet_area * g
    return CutInstance(
        shape=shape,
        h=float(h),
        lower=lower,
        direction=direction,
        centers=centers,
        facet_cells=facet_cells,
        facet_mid=facet_mid,
        facet_normal=facet_normal,
        facet_area=facet_area,
        cost=cost,
        pins=pins,
        height=y_centers[:, -1].copy(),
        a=int(a),
        b=int(b),
        n_phases=P,
        meta={"stencil": stencil, "c_bound": field.model.c * field.model.c_phi},
    )


def discretize(spec: CellProblemSpec) -> CutInstance:
    """Grid for ``R_{t,ell}^nu`` centred at the origin."""
    d = spec.d
    spec.rect  # validates 0 < ell <= t
    _grid_count(spec.t, spec.h, "t")
    _grid_count(spec.ell, spec.h, "ell")
    half = np.array([spec.t / 2] * (d - 1) + [spec.ell / 2])
    return discretize_box(
        -half, half, spec.nu, spec.field, spec.h,
        a=spec.a, b=spec.b, phases=spec.phases, stencil=spec.stencil,
    )


def pure_jump_labeling(inst: CutInstance) -> np.ndarray:
    """The boundary datum extended to every cell (always admissible)."""
    return np.where(inst.height > 0, inst.b, inst.a).astype(np.int64)


def check_pins(labeling: np.ndarray, inst: CutInstance) -> None:
    pinned = inst.pins >= 0
    if np.any(labeling[pinned] != inst.pins[pinned]):
        raise ContractError("labeling violates boundary pins")


def energy(labeling, inst: CutInstance) -> float:
    """Sum of facet costs across phase changes.

    Summed with :func:`math.fsum`, so the result depends only on the
    multiset of cut facets, not on their order.
    """
    lab = np.asarray(labeling, dtype=np.int64).ravel()
    if lab.size != inst.n_cells:
        raise ContractError("labeling has the wrong number of cells")
    check_pins(lab, inst)
    li = lab[inst.facet_cells[:, 0]]
    lj = lab[inst.facet_cells[:, 1]]
    cut = np.flatnonzero(li != lj)
    return math.fsum(inst.cost[cut, li[cut], lj[cut]].tolist())
