"""Plain-text and image outputs.

CSV and TSV files use LF line endings, ``.`` decimals and 17 significant
digits so that identical inputs give byte-identical files.

Graph dump format (one facet per line after a ``#`` header)::

    # homoglab cut instance
    # shape n1 n2 [n3]
    # h <spacing>
    # pins <cell>:<phase> ...        (only pinned cells)
    <cell_i> <cell_j> <cost for phases (a, b)>
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cell import CutInstance
from .errors import ParameterError

RECORD_COLUMNS = ("t", "ell", "seed", "value", "walltime_ms")
SUMMARY_COLUMNS = ("t", "ell", "N", "mean", "var", "m4", "m6", "expmom")


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def write_records(path, records, walltime: bool = False) -> Path:
    """Records CSV; ``walltime_ms`` is left blank unless ``walltime``."""
    rows = (
        (r.t, r.ell, r.seed, r.value, r.walltime_ms if walltime else "")
        for r in records
    )
    return write_table(path, RECORD_COLUMNS, rows)


def write_summaries(path, summaries) -> Path:
    rows = (
        (s.t, s.ell, s.n, s.mean, s.var, s.central.get(4, math.nan), s.central.get(6, math.nan), s.expmom)
        for s in summaries
    )
    return write_table(path, SUMMARY_COLUMNS, rows)


def dump_graph(inst: CutInstance, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# homoglab cut instance\n")
        fh.write("# shape " + " ".join(map(str, inst.shape)) + "\n")
        fh.write(f"# h {fmt(inst.h)}\n")
        pinned = np.flatnonzero(inst.pins >= 0)
        fh.write("# pins " + " ".join(f"{c}:{inst.pins[c]}" for c in pinned) + "\n")
        cost = inst.cost[:, inst.a, inst.b]
        for (i, j), c in zip(inst.facet_cells.tolist(), cost.tolist()):
            fh.write(f"{i} {j} {fmt(c)}\n")
    return path


def read_graph_dump(path):
    """Parse :func:`dump_graph` output into ``(shape, h, pins, edges, costs)``."""
    shape, h, pins = None, None, {}
    edges, costs = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# shape"):
            shape = tuple(int(v) for v in line.split()[2:])
        elif line.startswith("# h "):
            h = float(line.split()[2])
        elif line.startswith("# pins"):
            for tok in line.split()[2:]:
                c, p = tok.split(":")
                pins[int(c)] = int(p)
        elif line and not line.startswith("#"):
            i, j, c = line.split()
            edges.append((int(i), int(j)))
            costs.append(float(c))
    return shape, h, pins, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(costs)


def write_pgm(labeling, inst: CutInstance, path) -> Path:
    """Binary PGM of a planar labeling, one gray level per phase.

    Rows run from the top of the box (largest ``<x, nu>``) downwards.
    """
    if len(inst.shape) != 2:
        raise ParameterError("labeling images are only available for d = 2")
    n1, n2 = inst.shape
    lab = np.asarray(labeling).reshape(n1, n2)
    P = max(inst.n_phases, 2)
    img = np.rint(lab.T[::-1] * (255.0 / (P - 1))).astype(np.uint8)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n1} {n2}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return path


# gnuplot-ready plot data


def plot_variance(path, summaries, d: int = 2) -> Path:
    """``t ell var ref`` with the reference ``t^{1-d} ell``."""
    rows = ((s.t, s.ell, s.var, s.t ** (1 - d) * s.ell) for s in sorted(summaries, key=lambda s: s.t))
    return write_table(path, ("t", "ell", "var", "ref_t1md_ell"), rows, delimiter="\t")


def plot_means(path, rows) -> Path:
    data = ((r.rule, r.t, r.ell, r.mean, r.half_width) for r in rows)
    return write_table(path, ("rule", "t", "ell", "mean", "ci95"), data, delimiter="\t")


def plot_exceedance(path, rows) -> Path:
    """``rows``: ``(ell, s, empirical, analytic, sigma)`` tuples."""
    return write_table(path, ("ell", "s", "empirical", "analytic", "sigma"), rows, delimiter="\t")


def plot_gap(path, gap_rows) -> Path:
    by_t: dict[float, list[float]] = {}
    for r in gap_rows:
        by_t.setdefault(r.t, []).append(r.gap)
    data = ((t, len(g), float(np.mean(g)), float(np.min(g)), float(np.max(g))) for t, g in sorted(by_t.items()))
    return write_table(path, ("t", "n", "mean_gap", "min_gap", "max_gap"), data, delimiter="\t")


def emit_plotdata(outdir, summaries=(), convergence=(), exceedance=(), gaps=(), d: int = 2) -> dict[str, Path]:
    """Write every plot-data file kind; empty inputs give header-only files."""
    outdir = Path(outdir)
    return {
        "variance": plot_variance(outdir / "plot_variance.tsv", list(summaries), d),
        "means": plot_means(outdir / "plot_means.tsv", list(convergence)),
        "exceedance": plot_exceedance(outdir / "plot_exceedance.tsv", list(exceedance)),
        "gap": plot_gap(outdir / "plot_gap.tsv", list(gaps)),
    }
