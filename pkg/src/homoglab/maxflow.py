"""Integer push-relabel max-flow on sparse graphs.

Highest-label selection with the gap heuristic and periodic global
relabeling.  Capacities are ``int64`` so results are bit-reproducible on
every platform; callers quantize real costs with :func:`quantize`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

#: Real costs are mapped to integers by ``round(cost * CAPACITY_SCALE)``.
CAPACITY_SCALE = float(2**32)


def quantize(costs):
    """Scale real costs to ``int64`` capacities."""
    return np.rint(np.asarray(costs, dtype=np.float64) * CAPACITY_SCALE).astype(np.int64)


@dataclass(frozen=True)
class FlowResult:
    """Outcome of one max-flow computation.

    ``source_side[v]`` is True for nodes on the source side of a minimum
    cut.  Terminals are included (source is always True, sink False).
    """

    value: int
    source_side: np.ndarray


class FlowGraph:
    """Directed graph with paired residual arcs.

    Nodes ``0..n-1`` are ordinary; ``n`` is the source and ``n + 1`` the
    sink.  Arcs are accumulated with :meth:`add_edges` / :meth:`add_tedges`
    and frozen into CSR form on the first call to :meth:`maxflow`.
    """

    def __init__(self, n_nodes: int):
        self.n = int(n_nodes)
        self._tails: list[np.ndarray] = []
        self._heads: list[np.ndarray] = []
        self._caps: list[np.ndarray] = []
        self._rcaps: list[np.ndarray] = []
        self.source = self.n
        self.sink = self.n + 1

    def add_edges(self, u, v, cap_uv, cap_vu):
        """Add arcs ``u -> v`` and ``v -> u`` (one residual pair each edge)."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        cap_uv = np.broadcast_to(np.asarray(cap_uv, dtype=np.int64), u.shape)
        cap_vu = np.broadcast_to(np.asarray(cap_vu, dtype=np.int64), u.shape)
        if np.any(cap_uv < 0) or np.any(cap_vu < 0):
            raise ValueError("negative capacity")
        if np.any(u == v):
            raise ValueError("self loop")
        self._tails.append(u)
        self._heads.append(v)
        self._caps.append(np.array(cap_uv))
        self._rcaps.append(np.array(cap_vu))

    def add_tedges(self, v, cap_source, cap_sink):
        """Add terminal arcs ``source -> v`` and ``v -> sink``.

        Capacities for the same node may be given several times; they are
        summed.
        """
        v = np.asarray(v, dtype=np.int64).ravel()
        cs = np.zeros(self.n, dtype=np.int64)
        ct = np.zeros(self.n, dtype=np.int64)
        np.add.at(cs, v, np.broadcast_to(np.asarray(cap_source, dtype=np.int64), v.shape))
        np.add.at(ct, v, np.broadcast_to(np.asarray(cap_sink, dtype=np.int64), v.shape))
        if np.any(cs < 0) or np.any(ct < 0):
            raise ValueError("negative terminal capacity")
        nodes = np.arange(self.n, dtype=np.int64)
        m = cs > 0
        if m.any():
            self.add_edges(np.full(m.sum(), self.source), nodes[m], cs[m], 0)
        m = ct > 0
        if m.any():
            self.add_edges(nodes[m], np.full(m.sum(), self.sink), ct[m], 0)

    def _csr(self):
        if self._tails:
            tails = np.concatenate(self._tails)
            heads = np.concatenate(self._heads)
            caps = np.concatenate(self._caps)
            rcaps = np.concatenate(self._rcaps)
        else:
            tails = heads = caps = rcaps = np.zeros(0, dtype=np.int64)
        m = tails.size
        # arc 2k is the forward arc of edge k, arc 2k+1 its reverse
        a_tail = np.empty(2 * m, dtype=np.int64)
        a_head = np.empty(2 * m, dtype=np.int64)
        a_cap = np.empty(2 * m, dtype=np.int64)
        a_tail[0::2], a_tail[1::2] = tails, heads
        a_head[0::2], a_head[1::2] = heads, tails
        a_cap[0::2], a_cap[1::2] = caps, rcaps
        pair = np.arange(2 * m, dtype=np.int64) ^ 1
        order = np.argsort(a_tail, kind="stable")
        inv = np.empty_like(order)
        inv[order] = np.arange(2 * m, dtype=np.int64)
        head = a_head[order]
        cap = a_cap[order]
        rev = inv[pair[order]]
        n_all = self.n + 2
        first = np.zeros(n_all + 1, dtype=np.int64)
        np.add.at(first, a_tail + 1, 1)
        np.cumsum(first, out=first)
        return first, head, rev, cap

    def maxflow(self) -> FlowResult:
        first, head, rev, cap = self._csr()
        value = _push_relabel(self.n + 2, self.source, self.sink, first, head, rev, cap)
        sink_side = _reaches_sink(self.n + 2, self.sink, first, head, rev, cap)
        return FlowResult(int(value), ~sink_side)


@numba.njit(cache=True, nogil=True)
def _global_relabel(n, s, t, first, head, rev, cap, h, queue):
    # exact residual distances to t; s is never expanded
    for v in range(n):
        h[v] = n + 1
    h[s] = n
    h[t] = 0
    queue[0] = t
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        du = h[u] + 1
        for a in range(first[u], first[u + 1]):
            w = head[a]
            if h[w] == n + 1 and cap[rev[a]] > 0:
                h[w] = du
                queue[qt] = w
                qt += 1


@numba.njit(cache=True, nogil=True)
def _push_relabel(n, s, t, first, head, rev, cap):
    """First phase of push-relabel; returns the max-flow value.

    ``cap`` is overwritten with the residual capacities of a maximum
    preflow, which suffices to read off a minimum cut.
    """
    h = np.zeros(n, dtype=np.int64)
    ex = np.zeros(n, dtype=np.int64)
    cur = first[:-1].copy()
    queue = np.empty(n, dtype=np.int64)
    # active stacks per height and doubly linked lists of all nodes per height
    a_head = np.full(n + 1, -1, dtype=np.int64)
    a_next = np.full(n, -1, dtype=np.int64)
    b_head = np.full(n + 1, -1, dtype=np.int64)
    b_next = np.full(n, -1, dtype=np.int64)
    b_prev = np.full(n, -1, dtype=np.int64)

    for a in range(first[s], first[s + 1]):
        c = cap[a]
        if c > 0:
            w = head[a]
            cap[a] = 0
            cap[rev[a]] += c
            ex[w] += c
    if n <= 2:
        return ex[t]

    m = first[n]
    relabel_budget = 6 * n + m
    work = 0
    max_active = -1
    max_height = -1

    # (re)build labels and buckets
    rebuild = True
    while True:
        if rebuild:
            rebuild = False
            work = 0
            _global_relabel(n, s, t, first, head, rev, cap, h, queue)
            for v in range(n):
                if h[v] > n:
                    h[v] = n
            for k in range(n + 1):
                a_head[k] = -1
                b_head[k] = -1
            max_active = -1
            max_height = -1
            for v in range(n):
                cur[v] = first[v]
                if v == s or v == t or h[v] >= n:
                    continue
                k = h[v]
                b_prev[v] = -1
                b_next[v] = b_head[k]
                if b_head[k] >= 0:
                    b_prev[b_head[k]] = v
                b_head[k] = v
                if k > max_height:
                    max_height = k
                if ex[v] > 0:
                    a_next[v] = a_head[k]
                    a_head[k] = v
                    if k > max_active:
                        max_active = k

        if max_active < 0:
            break
        v = a_head[max_active]
        if v < 0:
            max_active -= 1
            continue
        a_head[max_active] = a_next[v]
        if h[v] != max_active or ex[v] == 0:
            continue

        # discharge v
        while ex[v] > 0:
            hv = h[v]
            end = first[v + 1]
            a = cur[v]
            while a < end:
                if cap[a] > 0:
                    w = head[a]
                    if h[w] == hv - 1:
                        d = ex[v] if ex[v] < cap[a] else cap[a]
                        cap[a] -= d
                        cap[rev[a]] += d
                        if ex[w] == 0 and w != t and w != s:
                            a_next[w] = a_head[hv - 1]
                            a_head[hv - 1] = w
                            if hv - 1 > max_active:
                                max_active = hv - 1
                        ex[w] += d
                        ex[v] -= d
                        if ex[v] == 0:
                            break
                a += 1
            if ex[v] == 0:
                cur[v] = a
                break

            # relabel v, removing it from its height bucket first
            work += 12 + (end - first[v])
            p, q = b_prev[v], b_next[v]
            if p >= 0:
                b_next[p] = q
            else:
                b_head[hv] = q
            if q >= 0:
                b_prev[q] = p
            if b_head[hv] < 0:
                # gap: nothing can reach the sink from heights >= hv
                for k in range(hv + 1, max_height + 1):
                    u = b_head[k]
                    while u >= 0:
                        h[u] = n
                        u = b_next[u]
                    b_head[k] = -1
                    a_head[k] = -1
                h[v] = n
                max_height = hv - 1
                if max_active > max_height:
                    max_active = max_height
                break
            newh = n
            best = first[v]
            for a2 in range(first[v], end):
                if cap[a2] > 0:
                    hw = h[head[a2]] + 1
                    if hw < newh:
                        newh = hw
                        best = a2
            if newh >= n:
                h[v] = n
                break
            h[v] = newh
            cur[v] = best
            b_prev[v] = -1
            b_next[v] = b_head[newh]
            if b_head[newh] >= 0:
                b_prev[b_head[newh]] = v
            b_head[newh] = v
            if newh > max_height:
                max_height = newh
            if work > relabel_budget:
                break

        if ex[v] > 0 and h[v] < n:
            a_next[v] = a_head[h[v]]
            a_head[h[v]] = v
            if h[v] > max_active:
                max_active = h[v]
        if work > relabel_budget:
            rebuild = True

    return ex[t]


@numba.njit(cache=True, nogil=True)
def _reaches_sink(n, t, first, head, rev, cap):
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    seen[t] = True
    queue[0] = t
    qh, qt = 0, 1
    while qh < qt:
        u = queue[qh]
        qh += 1
        for a in range(first[u], first[u + 1]):
            w = head[a]
            if not seen[w] and cap[rev[a]] > 0:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen
