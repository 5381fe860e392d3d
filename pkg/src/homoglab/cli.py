"""Command-line experiment runner.

    homoglab --config exp.ini [--out DIR] [--no-cache] [--threads N] [--dump-labeling]

Exit status: 0 on success, 1 when an experiment fails (partial outputs are
flagged in ``manifest.json``), 2 for config errors.  ``HOMOGLAB_SEED``
overrides ``stats.seed``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import struct
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cell import CellProblemSpec, discretize
from .config import Config, ConfigError, load
from .errors import HomoglabError
from .exports import (
    emit_plotdata,
    write_pgm,
    write_records,
    write_summaries,
    write_table,
)
from .fields import instantiate
from .oracle import StripeRealization, Y, exceedance_mc, replicate_seeds
from .process import X, planelike_gap
from .stats import (
    EnsembleError,
    ExperimentPlan,
    RunRecord,
    concentration_check,
    expectation_convergence,
    run_ensemble,
    summarize,
    variance_scaling_fit,
)

log = logging.getLogger("homoglab")

CACHE_MAGIC = b"HOMOGLAB-REC\x00\x00\x00\x01"  # 12-byte tag + version 1
_REC = struct.Struct("<ddQdd")


# cache of per-seed records


def write_cache(path: Path, records: list[RunRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<I", len(records)))
        for r in records:
            fh.write(_REC.pack(r.t, r.ell, r.seed, r.value, r.walltime_ms))
    os.replace(tmp, path)


def read_cache(path: Path) -> list[RunRecord] | None:
    try:
        data = path.read_bytes()
    except OSError:
        return None
    if len(data) < 20 or data[:16] != CACHE_MAGIC:
        return None
    (n,) = struct.unpack_from("<I", data, 16)
    if len(data) != 20 + n * _REC.size:
        return None
    out = []
    for k in range(n):
        t, ell, seed, value, wall = _REC.unpack_from(data, 20 + k * _REC.size)
        out.append(RunRecord(seed, t, ell, value, wall))
    return out


class Runner:
    def __init__(self, cfg: Config, out: Path, use_cache: bool, threads: int, dump_labeling: bool):
        self.cfg = cfg
        self.out = out
        self.use_cache = use_cache
        self.threads = threads
        self.dump_labeling = dump_labeling
        self.files: list[Path] = []

    def plan(self, rule) -> ExperimentPlan:
        c = self.cfg
        return ExperimentPlan(
            model=c.model(),
            ts=tuple(c["geometry.t"]),
            rule=rule,
            nu=c.nu,
            h=c["geometry.h"],
            replicates=c["stats.n"],
            base_seed=c["stats.seed"],
            p_max=c["stats.p_max"],
            a=c["phases.a"],
            b=c["phases.b"],
            phases=c.phases(),
            stencil=c["geometry.stencil"],
        )

    def ensemble(self, plan: ExperimentPlan) -> list[RunRecord]:
        key = hashlib.sha256(
            (self.cfg.canonical(("field.", "geometry.", "phases.")) + f"rule={plan.rule}\n").encode()
        ).hexdigest()[:16]
        cache_dir = self.out / "cache" / key

        def lookup(seed):
            if not self.use_cache:
                return None
            recs = read_cache(cache_dir / f"{seed}.rec")
            if recs is None or sorted(r.t for r in recs) != sorted(plan.ts):
                return None
            return recs

        try:
            records = run_ensemble(plan, self.threads, skip=lookup)
        except EnsembleError as exc:
            self._store(cache_dir, exc.partial)
            name = str(plan.rule).replace(":", "_")
            self.emit(write_records(self.out / f"records_partial_{name}.csv", exc.partial, self.cfg["output.walltime"]))
            raise
        self._store(cache_dir, records)
        return records

    def _store(self, cache_dir: Path, records: list[RunRecord]) -> None:
        by_seed: dict[int, list[RunRecord]] = {}
        for r in records:
            by_seed.setdefault(r.seed, []).append(r)
        for seed, recs in by_seed.items():
            path = cache_dir / f"{seed}.rec"
            if not path.exists():
                write_cache(path, recs)

    def emit(self, path: Path) -> None:
        self.files.append(path)

    def emit_all(self, paths) -> None:
        for p in paths:
            self.emit(p)

    # experiment kinds

    def run_cell(self) -> None:
        c = self.cfg
        model = c.model()
        f = instantiate(model, c["stats.seed"])
        rule = c.rules()[0]
        records = []
        for t in c["geometry.t"]:
            ell = c["geometry.ell"] if c["geometry.ell"] is not None else rule.height(t, c["geometry.h"])
            spec = CellProblemSpec(
                t, ell, c.nu, f, h=c["geometry.h"], a=c["phases.a"], b=c["phases.b"],
                phases=c.phases(), stencil=c["geometry.stencil"],
            )
            pv = X(spec, keep_result=self.dump_labeling)
            records.append(RunRecord(f.seed, t, ell, pv.value, 0.0))
            if self.dump_labeling and c.d == 2:
                self.emit(write_pgm(pv.result.labeling, discretize(spec), self.out / f"labeling_t{t:g}_ell{ell:g}.pgm"))
        self.emit(write_records(self.out / "cell.csv", records, c["output.walltime"]))

    def run_fluct(self) -> None:
        c = self.cfg
        plan = self.plan(c.rules()[0])
        records = self.ensemble(plan)
        self.emit(write_records(self.out / "records.csv", records, c["output.walltime"]))
        summaries = summarize(records, c["stats.p_max"], c.d)
        self.emit(write_summaries(self.out / "summaries.csv", summaries))
        fit = variance_scaling_fit(summaries, c.d)
        self.emit(write_table(
            self.out / "fit.csv",
            ("slope", "intercept", "r2", "reference_exponent", "skipped"),
            [(fit.slope, fit.intercept, fit.r2, fit.reference_exponent, fit.skipped)],
        ))
        self.emit(write_table(
            self.out / "ratios.csv", ("t", "ell", "var_t_d1_over_ell"),
            [(s.t, s.ell, r) for s, r in zip(summaries, fit.ratios)],
        ))
        rows = []
        for s in summaries:
            recs = [r for r in records if r.t == s.t]
            for C in c["stats.c_sweep"]:
                val, ok = concentration_check(recs, C, c.d)
                rows.append((s.t, s.ell, C, val, ok))
        self.emit(write_table(self.out / "concentration.csv", ("t", "ell", "C", "expmom", "pass"), rows))
        self.emit_all(emit_plotdata(self.out, summaries=summaries, d=c.d).values())

    def run_sweep(self) -> None:
        c = self.cfg
        plans = [self.plan(rule) for rule in c.rules()]
        recs = {}
        for plan in plans:
            recs[str(plan.rule)] = self.ensemble(plan)
            name = str(plan.rule).replace(":", "_")
            self.emit(write_records(self.out / f"records_{name}.csv", recs[str(plan.rule)], c["output.walltime"]))
            self.emit(write_summaries(self.out / f"summaries_{name}.csv", summarize(recs[str(plan.rule)], c["stats.p_max"], c.d)))
        rows = expectation_convergence(plans, self.threads, recs)
        self.emit(write_table(
            self.out / "convergence.csv", ("rule", "t", "ell", "mean", "ci95", "diff_vs_full"),
            [(r.rule, r.t, r.ell, r.mean, r.half_width, r.diff_vs_full) for r in rows],
        ))
        self.emit_all(emit_plotdata(self.out, convergence=rows, d=c.d).values())

    def run_oracle(self) -> None:
        c = self.cfg
        model = c.model()
        if c.d != 2:
            raise HomoglabError("oracle-check is planar only")
        seeds = [int(s) for s in _seeds(c)]
        rows = []
        for seed in seeds:
            f = instantiate(model, seed)
            real = StripeRealization.of(model, seed)
            for t in c["geometry.t"]:
                for ell0 in c["oracle.ell0"]:
                    if 2 * ell0 > t:
                        continue
                    x = X(CellProblemSpec(t, 2 * ell0, c.nu, f, h=c["geometry.h"])).value
                    y = Y(real, ell0)
                    upper = y + 4 * ell0 / t
                    rows.append((seed, t, ell0, y, x, upper, y <= x <= upper))
        self.emit(write_table(
            self.out / "oracle.csv", ("seed", "t", "ell0", "Y", "X_numeric", "upper_bound", "ok"), rows,
        ))
        exc_rows = []
        for ell0 in c["oracle.ell0"]:
            for s in c["oracle.s"]:
                emp, ana, sig = exceedance_mc(ell0, s, c["oracle.exceedance_seeds"], c["stats.seed"])
                exc_rows.append((ell0, s, emp, ana, sig))
        self.emit_all(emit_plotdata(self.out, exceedance=exc_rows, d=c.d).values())
        if not all(r[-1] for r in rows):
            raise HomoglabError("oracle sandwich violated")

    def run_gap(self) -> None:
        c = self.cfg
        seeds = [int(s) for s in _seeds(c)]
        rows = planelike_gap(c.model(), c["gap.ell_fixed"], c["geometry.t"], seeds, c["geometry.h"], c.nu)
        self.emit(write_table(
            self.out / "gap.csv", ("seed", "t", "x_fixed", "x_full", "gap"),
            [(r.seed, r.t, r.x_fixed, r.x_full, r.gap) for r in rows],
        ))
        self.emit_all(emit_plotdata(self.out, gaps=rows, d=c.d).values())

    def run(self) -> None:
        {
            "cell": self.run_cell,
            "fluct": self.run_fluct,
            "sweep": self.run_sweep,
            "oracle-check": self.run_oracle,
            "planelike-gap": self.run_gap,
        }[self.cfg.kind]()


def _seeds(cfg: Config):
    return replicate_seeds(cfg["stats.seed"], cfg["stats.n"])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(runner: Runner, status: str, error: str | None) -> Path:
    out = runner.out
    files = sorted({p for p in runner.files if p.exists()})
    manifest = {
        "config_hash": runner.cfg.digest(),
        "code_version": __version__,
        "experiment": runner.cfg.kind,
        "status": status,
        "partial": status != "ok",
        "error": error,
        "files": {str(p.relative_to(out)): _sha256(p) for p in files},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="homoglab", description="Cell-formula experiments for random interfacial energies.")
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--no-cache", action="store_true", help="recompute every record")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = one per CPU")
    p.add_argument("--dump-labeling", action="store_true", help="write PGM images of minimizers (d = 2, cell runs)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load(args.config)
        env_seed = os.environ.get("HOMOGLAB_SEED")
        if env_seed is not None:
            try:
                cfg.values["stats.seed"] = int(env_seed)
            except ValueError:
                raise ConfigError(f"HOMOGLAB_SEED is not an integer: {env_seed!r}", "HOMOGLAB_SEED", 0, 0) from None
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    runner = Runner(cfg, out, not args.no_cache, args.threads, args.dump_labeling)
    status, error = "ok", None
    try:
        runner.run()
    except (HomoglabError, MemoryError) as exc:
        status, error = "error", str(exc)
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
    write_manifest(runner, status, error)
    return 0 if status == "ok" else 1


if __name__ == "__main__":
    sys.exit(main())
