"""Minimizers of the discrete partition energy.

Two phases: exact minimum s-t cut with pinned ``a`` cells merged into the
source and pinned ``b`` cells into the sink.  Three or more phases:
alpha-expansion, each move again a binary cut.  All solvers optimise the
integer-quantized energy and report the real energy of the labeling they
return.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cell import CutInstance, energy, pure_jump_labeling
from .errors import ArityError, SizeError
from .maxflow import CAPACITY_SCALE, FlowGraph, quantize

__all__ = [
    "SolveResult",
    "solve",
    "solve_two_phase",
    "solve_exhaustive",
    "solve_multiphase",
    "quantized_energy",
    "EXHAUSTIVE_LIMIT",
]

EXHAUSTIVE_LIMIT = 2**24


@dataclass
class SolveResult:
    """Minimal (or best found) energy with an attaining labeling."""

    value: float
    labeling: np.ndarray
    exact: bool
    quantization_error: float = 0.0
    method: str = ""
    history: list[int] = field(default_factory=list)
    nonmetric: bool = False


def _quant_bound(inst: CutInstance) -> float:
    return inst.n_facets / CAPACITY_SCALE


def _split_facets(inst: CutInstance):
    """Classify facets by pin status; node ids index the free cells."""
    node = np.full(inst.n_cells, -1, dtype=np.int64)
    free = inst.free
    node[free] = np.arange(free.size)
    fi, fj = inst.facet_cells[:, 0], inst.facet_cells[:, 1]
    pi, pj = inst.pins[fi], inst.pins[fj]
    return node, fi, fj, pi, pj


def quantized_energy(labeling: np.ndarray, inst: CutInstance, qcost: np.ndarray | None = None) -> int:
    """Energy in integer capacity units (exact integer arithmetic)."""
    if qcost is None:
        qcost = quantize(inst.cost)
    li = labeling[inst.facet_cells[:, 0]]
    lj = labeling[inst.facet_cells[:, 1]]
    return int(qcost[np.arange(inst.n_facets), li, lj].sum())


def solve_two_phase(inst: CutInstance) -> SolveResult:
    """Exact minimum via max-flow / min-cut."""
    if inst.n_phases != 2:
        raise ArityError(f"two-phase solver needs exactly 2 phases, got {inst.n_phases}")
    a, b = inst.a, inst.b
    q = quantize(inst.cost[:, a, b])
    node, fi, fj, pi, pj = _split_facets(inst)
    g = FlowGraph(inst.free.size)

    both = (pi < 0) & (pj < 0)
    g.add_edges(node[fi[both]], node[fj[both]], q[both], q[both])
    for free_end, pinned_end in ((fi, pj), (fj, pi)):
        m = (node[free_end] >= 0) & (pinned_end >= 0)
        v = node[free_end[m]]
        to_a = pinned_end[m] == a
        g.add_tedges(v, np.where(to_a, q[m], 0), np.where(to_a, 0, q[m]))

    flow = g.maxflow()
    labeling = inst.pins.copy()
    labeling[inst.free] = np.where(flow.source_side[: inst.free.size], a, b)
    return SolveResult(
        value=energy(labeling, inst),
        labeling=labeling,
        exact=True,
        quantization_error=_quant_bound(inst),
        method="maxflow",
        history=[flow.value],
    )


def solve_exhaustive(inst: CutInstance, chunk: int = 1 << 16) -> SolveResult:
    """Global minimum by enumerating every labeling of the free cells.

    Ties are broken towards the first labeling in lexicographic order of
    the free-cell phases.
    """
    P = inst.n_phases
    free = inst.free
    k = free.size
    if P**k > EXHAUSTIVE_LIMIT:
        raise SizeError(f"{P}^{k} labelings exceed the enumeration limit {EXHAUSTIVE_LIMIT}")
    qc = quantize(inst.cost)
    node, fi, fj, pi, pj = _split_facets(inst)
    F = np.arange(inst.n_facets)

    const = int(qc[F[(pi >= 0) & (pj >= 0)], pi[(pi >= 0) & (pj >= 0)], pj[(pi >= 0) & (pj >= 0)]].sum())
    unary = np.zeros((k, P), dtype=np.int64)
    for p in range(P):
        m = (pi < 0) & (pj >= 0)
        np.add.at(unary[:, p], node[fi[m]], qc[F[m], p, pj[m]])
        m = (pj < 0) & (pi >= 0)
        np.add.at(unary[:, p], node[fj[m]], qc[F[m], pi[m], p])
    pair = (pi < 0) & (pj < 0)
    pu, pv, pc = node[fi[pair]], node[fj[pair]], qc[F[pair]]

    best, best_idx = None, 0
    total = P**k
    powers = P ** np.arange(k - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        lab = (idx[:, None] // powers[None, :]) % P
        e = np.full(idx.size, const, dtype=np.int64)
        if k:
            e += unary[np.arange(k)[None, :], lab].sum(axis=1)
        for f in range(pu.size):
            e += pc[f][lab[:, pu[f]], lab[:, pv[f]]]
        j = int(np.argmin(e))
        if best is None or e[j] < best:
            best, best_idx = int(e[j]), int(idx[j])

    labeling = inst.pins.copy()
    if k:
        labeling[free] = (best_idx // powers) % P
    return SolveResult(
        value=energy(labeling, inst),
        labeling=labeling,
        exact=True,
        quantization_error=_quant_bound(inst),
        method="exhaustive",
        history=[best],
    )


def _nonmetric(inst: CutInstance, tol: float = 1e-9) -> bool:
    c = inst.cost
    for p, q, r in itertools.permutations(range(inst.n_phases), 3):
        if np.any(c[:, p, q] > c[:, p, r] + c[:, r, q] + tol):
            return True
    return False


def _expansion_move(inst, qc, labels, alpha, node, fi, fj, pi, pj):
    n = inst.free.size
    F = np.arange(inst.n_facets)
    coef = np.zeros(n, dtype=np.int64)

    # free cell next to a pinned one: unary term on the free cell
    for free_end, pinned_end, free_first in ((fi, pj, True), (fj, pi, False)):
        m = (node[free_end] >= 0) & (pinned_end >= 0)
        lf = labels[free_end[m]]
        lp = pinned_end[m]
        if free_first:
            e0, e1 = qc[F[m], lf, lp], qc[F[m], alpha, lp]
        else:
            e0, e1 = qc[F[m], lp, lf], qc[F[m], lp, alpha]
        np.add.at(coef, node[free_end[m]], e1 - e0)

    both = (pi < 0) & (pj < 0)
    f = F[both]
    li, lj = labels[fi[both]], labels[fj[both]]
    A = qc[f, li, lj]
    B = qc[f, li, alpha]
    C = qc[f, alpha, lj]
    D = qc[f, alpha, alpha]
    np.add.at(coef, node[fi[both]], C - A)
    np.add.at(coef, node[fj[both]], D - C)
    # non-submodular pairs are truncated
    pair_cap = np.maximum(B + C - A - D, 0)

    g = FlowGraph(n)
    g.add_edges(node[fi[both]], node[fj[both]], pair_cap, 0)
    nodes = np.arange(n)
    g.add_tedges(nodes, np.maximum(coef, 0), np.maximum(-coef, 0))
    flow = g.maxflow()
    new = labels.copy()
    switch = ~flow.source_side[:n]
    new[inst.free[switch]] = alpha
    return new


def solve_multiphase(inst: CutInstance, init: np.ndarray | None = None) -> SolveResult:
    """Alpha-expansion local minimum (phases visited in index order).

    Starts from the pure-jump labeling and stops after a full sweep with no
    strict improvement.  ``history`` holds the integer energy after each
    sweep and is non-increasing.
    """
    P = inst.n_phases
    if P < 3:
        raise ArityError(f"alpha-expansion expects at least 3 phases, got {P}")
    nonmetric = _nonmetric(inst)
    if nonmetric:
        warnings.warn("facet costs violate the triangle inequality; expansion moves are truncated", stacklevel=2)
    qc = quantize(inst.cost)
    node, fi, fj, pi, pj = _split_facets(inst)
    labels = pure_jump_labeling(inst) if init is None else np.asarray(init, dtype=np.int64).copy()
    current = quantized_energy(labels, inst, qc)
    history = [current]
    while True:
        improved = False
        for alpha in range(P):
            cand = _expansion_move(inst, qc, labels, alpha, node, fi, fj, pi, pj)
            e = quantized_energy(cand, inst, qc)
            if e < current:
                labels, current, improved = cand, e, True
        history.append(current)
        if not improved:
            break
    return SolveResult(
        value=energy(labels, inst),
        labeling=labels,
        exact=False,
        quantization_error=_quant_bound(inst),
        method="alpha-expansion",
        history=history,
        nonmetric=nonmetric,
    )


def solve(inst: CutInstance) -> SolveResult:
    """Exact cut for two phases, alpha-expansion otherwise."""
    return solve_two_phase(inst) if inst.n_phases == 2 else solve_multiphase(inst)
