import networkx as nx
import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from homoglab.maxflow import CAPACITY_SCALE, FlowGraph, quantize


def _random_graph(r, n, m, cmax=50):
    u = r.integers(0, n, m)
    v = r.integers(0, n, m)
    keep = u != v
    u, v = u[keep], v[keep]
    return u, v, r.integers(0, cmax, u.size), r.integers(0, cmax, u.size)


def _build(n, u, v, c1, c2, ts, tt):
    g = FlowGraph(n)
    g.add_edges(u, v, c1, c2)
    g.add_tedges(np.arange(n), ts, tt)
    return g


def _scipy_value(n, u, v, c1, c2, ts, tt):
    s, t = n, n + 1
    rows = np.concatenate([u, v, np.full(n, s), np.arange(n)])
    cols = np.concatenate([v, u, np.arange(n), np.full(n, t)])
    caps = np.concatenate([c1, c2, ts, tt]).astype(np.int32)
    mat = csr_matrix((caps, (rows, cols)), shape=(n + 2, n + 2))  # duplicates are summed
    mat.eliminate_zeros()
    return maximum_flow(mat, s, t).flow_value


def test_quantize():
    assert quantize([1.0, 0.5, 2.0**-33]).tolist() == [2**32, 2**31, 0]
    assert CAPACITY_SCALE == 2.0**32


@pytest.mark.parametrize("trial", range(60))
def test_against_scipy(trial):
    r = np.random.default_rng(trial)
    n = int(r.integers(2, 60))
    u, v, c1, c2 = _random_graph(r, n, int(r.integers(1, 4 * n)))
    ts = r.integers(0, 30, n) * (r.random(n) < 0.3)
    tt = r.integers(0, 30, n) * (r.random(n) < 0.3)
    res = _build(n, u, v, c1, c2, ts, tt).maxflow()
    assert res.value == _scipy_value(n, u, v, c1, c2, ts, tt)


@pytest.mark.parametrize("trial", range(30))
def test_cut_certificate(trial):
    # the reported partition is a cut whose capacity equals the flow value
    r = np.random.default_rng(100 + trial)
    n = int(r.integers(2, 40))
    u, v, c1, c2 = _random_graph(r, n, 3 * n)
    ts = r.integers(0, 30, n) * (r.random(n) < 0.4)
    tt = r.integers(0, 30, n) * (r.random(n) < 0.4)
    res = _build(n, u, v, c1, c2, ts, tt).maxflow()
    S = res.source_side
    assert S[n] and not S[n + 1]
    cut = c1[S[u] & ~S[v]].sum() + c2[S[v] & ~S[u]].sum() + ts[~S[:n]].sum() + tt[S[:n]].sum()
    assert cut == res.value


def test_against_networkx_grid():
    r = np.random.default_rng(7)
    H, W = 12, 15
    idx = np.arange(H * W).reshape(H, W)
    g = FlowGraph(H * W)
    G = nx.DiGraph()
    for (a, b) in [(idx[:, :-1], idx[:, 1:]), (idx[:-1, :], idx[1:, :])]:
        c = r.integers(1, 100, a.size)
        g.add_edges(a.ravel(), b.ravel(), c, c)
        for x, y, w in zip(a.ravel(), b.ravel(), c):
            G.add_edge(int(x), int(y), capacity=int(w))
            G.add_edge(int(y), int(x), capacity=int(w))
    g.add_tedges(idx[:, 0], 1000, 0)
    g.add_tedges(idx[:, -1], 0, 1000)
    for x in idx[:, 0]:
        G.add_edge("s", int(x), capacity=1000)
    for x in idx[:, -1]:
        G.add_edge(int(x), "t", capacity=1000)
    assert g.maxflow().value == nx.maximum_flow_value(G, "s", "t")


def test_empty_and_disconnected():
    g = FlowGraph(3)
    res = g.maxflow()
    assert res.value == 0
    g = FlowGraph(2)
    g.add_tedges([0], 5, 0)
    g.add_tedges([1], 0, 5)
    assert g.maxflow().value == 0


def test_large_capacities_do_not_overflow():
    # grid-sized sums of 2^32-scaled costs stay well inside int64
    n = 1000
    g = FlowGraph(n)
    g.add_edges(np.arange(n - 1), np.arange(1, n), 2 * 2**32, 2 * 2**32)
    g.add_tedges([0], 10**15, 0)
    g.add_tedges([n - 1], 0, 10**15)
    assert g.maxflow().value == 2 * 2**32


def test_rejects_bad_input():
    g = FlowGraph(2)
    with pytest.raises(ValueError):
        g.add_edges([0], [1], [-1], [0])
    with pytest.raises(ValueError):
        g.add_edges([0], [0], [1], [1])
