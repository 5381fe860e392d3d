"""Monte Carlo ensembles over seeds and their summaries.

Replicate ``r`` of a plan uses the field seed ``mix_seed(base_seed, r)``,
so records do not depend on execution order or thread count.  Records are
sorted by ``(t, seed)`` before any reduction.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps

from .cell import CellProblemSpec, PhaseSet, TWO_PHASES
from .errors import ArityError, HomoglabError, ParameterError
from .fields import FieldModel, instantiate
from .process import X
from .rng import mix_seed

__all__ = [
    "HeightRule",
    "ExperimentPlan",
    "RunRecord",
    "MomentSummary",
    "ScalingFit",
    "EnsembleError",
    "run_ensemble",
    "moments",
    "summarize",
    "variance_scaling_fit",
    "concentration_check",
    "expectation_convergence",
    "bootstrap_ci",
]


@dataclass(frozen=True)
class HeightRule:
    """How the cell height ``ell_t`` grows with ``t``.

    ``full``: ``ell = t``; ``fixed(l0)``; ``log(k)``: ``k * ceil(log2 t)``;
    ``power(a)``: ``ceil(t^a)``.  Results are rounded to the grid and
    clamped into ``[max(1, h), t]``.
    """

    kind: str = "full"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("full", "fixed", "log", "power"):
            raise ParameterError(f"unknown height rule {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "HeightRule":
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip().lower()
        if kind == "full":
            return cls("full")
        if not arg:
            raise ParameterError(f"height rule {kind!r} needs a parameter")
        return cls(kind, float(arg))

    def __str__(self) -> str:
        return "full" if self.kind == "full" else f"{self.kind}:{self.param:g}"

    def raw(self, t: float) -> float:
        if self.kind == "full":
            return t
        if self.kind == "fixed":
            return self.param
        if self.kind == "log":
            return self.param * math.ceil(math.log2(t))
        return math.ceil(t**self.param)

    def height(self, t: float, h: float) -> float:
        ell = round(self.raw(t) / h) * h
        return min(max(ell, max(1.0, h)), t)


@dataclass(frozen=True)
class ExperimentPlan:
    model: FieldModel
    ts: tuple[float, ...]
    rule: HeightRule = HeightRule()
    nu: tuple[float, ...] | None = None
    h: float = 0.5
    replicates: int = 100
    base_seed: int = 0
    p_max: int = 3
    a: int = 0
    b: int = 1
    phases: PhaseSet = TWO_PHASES
    stencil: str = "axis"

    def __post_init__(self):
        if self.replicates < 2:
            raise ParameterError("an ensemble needs at least 2 replicates")
        nu = self.nu if self.nu is not None else (0.0,) * (self.model.d - 1) + (1.0,)
        nu = np.asarray(nu, dtype=np.float64)
        object.__setattr__(self, "nu", tuple(float(v) for v in nu / np.linalg.norm(nu)))
        object.__setattr__(self, "ts", tuple(float(t) for t in self.ts))
        for t in self.ts:
            ell = self.rule.height(t, self.h)
            if not 1 <= ell <= t:
                raise ParameterError(f"height {ell} out of [1, {t}] for t = {t}")

    @property
    def d(self) -> int:
        return self.model.d

    def seeds(self) -> list[int]:
        return [mix_seed(self.base_seed, r) for r in range(self.replicates)]

    def spec(self, seed: int, t: float) -> CellProblemSpec:
        return CellProblemSpec(
            t, self.rule.height(t, self.h), self.nu, instantiate(self.model, seed),
            h=self.h, a=self.a, b=self.b, phases=self.phases, stencil=self.stencil,
        )


@dataclass(frozen=True)
class RunRecord:
    seed: int
    t: float
    ell: float
    value: float
    walltime_ms: float = 0.0


class EnsembleError(HomoglabError):
    """An ensemble stopped early; ``partial`` holds the finished records."""

    def __init__(self, message: str, partial: list[RunRecord]):
        super().__init__(message)
        self.partial = partial


def _one(plan: ExperimentPlan, seed: int, t: float) -> RunRecord:
    start = time.perf_counter()
    spec = plan.spec(seed, t)
    value = X(spec).value
    return RunRecord(seed, t, spec.ell, value, 1e3 * (time.perf_counter() - start))


def run_ensemble(
    plan: ExperimentPlan,
    threads: int = 1,
    runner: Callable[[ExperimentPlan, int, float], RunRecord] = _one,
    skip: Callable[[int], list[RunRecord] | None] | None = None,
) -> list[RunRecord]:
    """All ``replicates x len(ts)`` records, sorted by ``(t, seed)``.

    ``skip(seed)`` may return previously computed records for a seed (a
    cache hit); those are used verbatim.  ``threads = 0`` means one worker
    per CPU.
    """
    jobs = []
    records: list[RunRecord] = []
    for seed in plan.seeds():
        cached = skip(seed) if skip is not None else None
        if cached is not None:
            records.extend(cached)
        else:
            jobs.extend((seed, t) for t in plan.ts)
    try:
        if threads == 1 or len(jobs) <= 1:
            for seed, t in jobs:
                records.append(runner(plan, seed, t))
        else:
            with ThreadPoolExecutor(max_workers=threads or None) as pool:
                futures = [pool.submit(runner, plan, seed, t) for seed, t in jobs]
                for fut in futures:
                    records.append(fut.result())
    except (MemoryError, HomoglabError) as exc:
        records.sort(key=lambda r: (r.t, r.seed))
        raise EnsembleError(f"ensemble aborted: {exc}", records) from exc
    records.sort(key=lambda r: (r.t, r.seed))
    return records


@dataclass
class MomentSummary:
    t: float
    ell: float
    n: int
    mean: float
    var: float
    central: dict[int, float]
    expmom: float
    d: int = 2

    def m(self, k: int) -> float:
        return self.central[k]


def _expmom(x: np.ndarray, mean: float, t: float, ell: float, d: int, C: float) -> float:
    scale = math.sqrt(t ** (1 - d) * ell)
    return float(np.mean(np.exp((np.abs(x - mean) / scale) ** (1.0 / d) / C)))


def moments(records: Sequence[RunRecord], p_max: int = 3, d: int = 2, C: float = 1.0) -> MomentSummary:
    """Sample moments at one ``(t, ell)``.

    ``var`` is unbiased; ``central[2p]`` are plain averages of
    ``(X - mean)^(2p)`` for ``p <= p_max``; ``expmom`` is the empirical
    exponential moment of the normalized fluctuation with constant ``C``.
    """
    if len(records) < 2:
        raise ArityError("moments need at least two samples")
    if len({(r.t, r.ell) for r in records}) != 1:
        raise ParameterError("records mix several (t, ell)")
    recs = sorted(records, key=lambda r: (r.t, r.seed))
    x = np.array([r.value for r in recs])
    t, ell = recs[0].t, recs[0].ell
    mean = float(x.mean())
    dev = x - mean
    var = float(dev @ dev / (x.size - 1))
    central = {2 * p: float(np.mean(dev ** (2 * p))) for p in range(1, p_max + 1)}
    return MomentSummary(t, ell, x.size, mean, var, central, _expmom(x, mean, t, ell, d, C), d)


def summarize(records: Sequence[RunRecord], p_max: int = 3, d: int = 2, C: float = 1.0) -> list[MomentSummary]:
    groups: dict[tuple[float, float], list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.t, r.ell), []).append(r)
    return [moments(groups[k], p_max, d, C) for k in sorted(groups)]


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    r2: float
    reference_exponent: float
    ratios: list[float] = field(default_factory=list)
    skipped: bool = False
    reason: str = ""


def variance_scaling_fit(summaries: Sequence[MomentSummary], d: int | None = None) -> ScalingFit:
    """Least squares of ``log Var`` on ``log t``.

    ``ratios`` are ``Var * t^{d-1} / ell`` per ``t``, which should stay
    bounded if the variance decays like ``t^{1-d} ell``.
    """
    summaries = sorted(summaries, key=lambda s: s.t)
    d = d if d is not None else (summaries[0].d if summaries else 2)
    ratios = [s.var * s.t ** (d - 1) / s.ell for s in summaries]
    ref = 1.0 - d
    if len(summaries) < 3:
        return ScalingFit(math.nan, math.nan, math.nan, ref, ratios, True, "fewer than 3 points")
    if any(s.var <= 0 for s in summaries):
        return ScalingFit(math.nan, math.nan, math.nan, ref, ratios, True, "zero variance")
    lt = np.log([s.t for s in summaries])
    lv = np.log([s.var for s in summaries])
    fit = sps.linregress(lt, lv)
    return ScalingFit(float(fit.slope), float(fit.intercept), float(fit.rvalue**2), ref, ratios)


def concentration_check(records: Sequence[RunRecord], C: float, d: int = 2, bound: float = 4.0) -> tuple[float, bool]:
    """Empirical exponential moment and whether it is ``<= bound``."""
    s = moments(records, 1, d, C)
    return s.expmom, s.expmom <= bound


def bootstrap_ci(samples, statistic, n_resamples: int = 1000, seed: int = 0, level: float = 0.95):
    """Percentile bootstrap interval for ``statistic`` (seeded)."""
    res = sps.bootstrap(
        (np.asarray(samples, dtype=np.float64),), statistic, n_resamples=n_resamples,
        confidence_level=level, method="percentile", rng=np.random.default_rng(seed), vectorized=False,
    )
    return float(res.confidence_interval.low), float(res.confidence_interval.high)


@dataclass
class ConvergenceRow:
    rule: str
    t: float
    ell: float
    mean: float
    half_width: float
    diff_vs_full: float | None


def _mean_ci(x: np.ndarray, z: float = 1.959963984540054) -> tuple[float, float]:
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size))


def expectation_convergence(
    plans: Sequence[ExperimentPlan],
    threads: int = 1,
    records: dict[str, list[RunRecord]] | None = None,
) -> list[ConvergenceRow]:
    """Sample means with 95% normal half-widths per height rule and ``t``.

    ``diff_vs_full`` is the distance to the ``full`` rule's mean at the same
    ``t`` when a full-rule plan is present.  Pre-computed ``records`` keyed
    by ``str(rule)`` are reused.
    """
    records = dict(records or {})
    for plan in plans:
        if str(plan.rule) not in records:
            records[str(plan.rule)] = run_ensemble(plan, threads)
    full_means = {}
    if "full" in records:
        for t in sorted({r.t for r in records["full"]}):
            full_means[t] = float(np.mean([r.value for r in records["full"] if r.t == t]))
    rows = []
    for plan in plans:
        rule = str(plan.rule)
        for t in plan.ts:
            recs = [r for r in records[rule] if r.t == t]
            x = np.array([r.value for r in recs])
            m, hw = _mean_ci(x)
            diff = abs(m - full_means[t]) if t in full_means else None
            rows.append(ConvergenceRow(rule, t, recs[0].ell, m, hw, diff))
    return rows
