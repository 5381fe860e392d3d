import numpy as np
import pytest

from homoglab import CellProblemSpec, FieldModel, discretize, instantiate, solve
from homoglab.exports import (
    RECORD_COLUMNS,
    SUMMARY_COLUMNS,
    dump_graph,
    emit_plotdata,
    fmt,
    read_graph_dump,
    write_pgm,
    write_records,
    write_summaries,
)
from homoglab.oracle import exceedance_mc
from homoglab.stats import MomentSummary, RunRecord


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(1.0) == "1"
    assert fmt(3) == "3"
    assert fmt(True) == "1"
    assert fmt(None) == ""
    assert fmt(float("nan")) == "nan"


def test_records_csv(tmp_path):
    recs = [RunRecord(7, 8.0, 4.0, 1.2345678901234567, 12.5)]
    p = write_records(tmp_path / "r.csv", recs)
    raw = p.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(RECORD_COLUMNS)
    assert lines[1] == "8,4,7,1.2345678901234567,"
    assert write_records(tmp_path / "w.csv", recs, walltime=True).read_text().splitlines()[1].endswith(",12.5")


def test_summaries_csv(tmp_path):
    s = MomentSummary(8.0, 4.0, 10, 1.5, 0.25, {2: 0.2, 4: 0.1, 6: 0.05}, 1.1)
    lines = write_summaries(tmp_path / "s.csv", [s]).read_text().splitlines()
    assert lines == [",".join(SUMMARY_COLUMNS), "8,4,10,1.5,0.25,0.10000000000000001,0.050000000000000003,1.1000000000000001"]


def test_plotdata_empty(tmp_path):
    files = emit_plotdata(tmp_path)
    assert set(files) == {"variance", "means", "exceedance", "gap"}
    for p in files.values():
        assert len(p.read_text().splitlines()) == 1


def test_plot_variance_rows(tmp_path):
    ss = [MomentSummary(t, 8.0, 50, 1.0, 1.0 / t, {2: 1.0 / t}, 1.0) for t in (32, 64, 128, 256)]
    lines = emit_plotdata(tmp_path, summaries=ss)["variance"].read_text().splitlines()
    assert len(lines) == 5
    t, ell, var, ref = (float(v) for v in lines[2].split("\t"))
    assert t == 64 and ref == pytest.approx(ell / t)


def test_plot_exceedance_within_3_sigma(tmp_path):
    rows = [(ell, s, *exceedance_mc(ell, s, 20_000, base_seed=4)) for ell, s in ((1, 1.5), (2, 1.3))]
    p = emit_plotdata(tmp_path, exceedance=rows)["exceedance"]
    for line in p.read_text().splitlines()[1:]:
        _, _, emp, ana, sig = (float(v) for v in line.split("\t"))
        assert abs(emp - ana) <= 3 * sig


def test_graph_dump_roundtrip(tmp_path):
    f = instantiate(FieldModel.checkerboard(), 2)
    inst = discretize(CellProblemSpec(4, 2, (0.0, 1.0), f))
    shape, h, pins, edges, costs = read_graph_dump(dump_graph(inst, tmp_path / "g.txt"))
    assert shape == inst.shape and h == 0.5
    assert pins == {int(c): int(inst.pins[c]) for c in np.flatnonzero(inst.pins >= 0)}
    assert np.array_equal(edges, inst.facet_cells)
    assert np.array_equal(costs, inst.cost[:, 0, 1])


def test_pgm(tmp_path):
    f = instantiate(FieldModel.constant(), 0)
    inst = discretize(CellProblemSpec(4, 2, (0.0, 1.0), f, h=1.0))
    res = solve(inst)
    raw = write_pgm(res.labeling, inst, tmp_path / "l.pgm").read_bytes()
    header = b"P5\n4 2\n255\n"
    assert raw.startswith(header)
    img = np.frombuffer(raw[len(header):], dtype=np.uint8).reshape(2, 4)
    assert img[0].tolist() == [255] * 4 and img[1].tolist() == [0] * 4
