"""Single-source shortest paths with negative edge weights.

``sssp_general`` zeroes every negative edge, then restores them one target
node at a time while keeping a feasible potential (one pruned Dijkstra per
node with negative in-edges), and finishes with a plain Dijkstra on reduced
weights.  The work is ``O(n_neg * (m + n log n))`` where ``n_neg`` counts nodes
with a negative in-edge.
"""
from __future__ import annotations

import math
from collections import deque
from heapq import heappop, heappush

import numpy as np

from .graph import Graph
from .potential import ContractViolation, is_feasible

__all__ = ["NegativeCycleFound", "NEGATIVE_CYCLE", "sssp_general", "spfa_distances", "dijkstra_distances"]

_INF = math.inf


class NegativeCycleFound:
    """Result marker: the weights contain a negative cycle."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NEGATIVE_CYCLE"

    def __bool__(self) -> bool:
        return False


NEGATIVE_CYCLE = NegativeCycleFound()


def _as_list(w) -> list:
    return np.asarray(w).tolist()


def dijkstra_distances(g: Graph, w, source: int, phi=None) -> np.ndarray:
    """Dijkstra on ``w`` (or on reduced weights if ``phi`` is given); returns raw-weight distances."""
    w = _as_list(w)
    n = g.node_count
    if phi is None:
        phi = [0] * n
    else:
        phi = _as_list(phi)
    dist, _ = _dijkstra(g, w, phi, source)
    out = np.full(n, _INF)
    for x, d in dist.items():
        out[x] = d + phi[source] - phi[x]
    return out


def _dijkstra(g, w, phi, source, bound=_INF, stop=None):
    # returns (settled distances, insertions); with ``stop`` = {node: threshold} returns None on a hit
    off, dst = g.off, g.dst
    label = {source: 0}
    done = {}
    heap = [(0, source)]
    ins = 1
    while heap:
        d, x = heappop(heap)
        if x in done:
            continue
        done[x] = d
        px = phi[x]
        for k in range(off[x], off[x + 1]):
            y = dst[k]
            if y in done:
                continue
            nd = d + w[k] + phi[y] - px
            if nd >= bound:
                continue
            if stop is not None and y in stop and nd < stop[y]:
                return None, ins
            if y not in label or nd < label[y]:
                label[y] = nd
                heappush(heap, (nd, y))
                ins += 1
    return done, ins


def spfa_distances(g: Graph, w, source: int):
    """Queue-based Bellman-Ford from ``source``; ``NEGATIVE_CYCLE`` if one is reachable from it."""
    w = _as_list(w)
    n = g.node_count
    off, dst = g.off, g.dst
    dist = [_INF] * n
    hops = [0] * n
    inq = [False] * n
    dist[source] = 0
    queue = deque([source])
    inq[source] = True
    while queue:
        x = queue.popleft()
        inq[x] = False
        dx = dist[x]
        for k in range(off[x], off[x + 1]):
            y = dst[k]
            nd = dx + w[k]
            if nd < dist[y]:
                dist[y] = nd
                hops[y] = hops[x] + 1
                if hops[y] >= n:
                    return NEGATIVE_CYCLE
                if not inq[y]:
                    inq[y] = True
                    queue.append(y)
    return np.asarray(dist, dtype=float)


def sssp_general(g: Graph, w, source: int, work: dict | None = None, validate: bool = False):
    """Shortest-path distances from ``source`` for arbitrary weights, or ``NEGATIVE_CYCLE``.

    Unreachable nodes get ``inf``.  Negative cycles anywhere in the graph are
    reported, even if unreachable from ``source``.  If ``work`` is a dict it
    receives ``insertions`` (priority-queue pushes, all rounds) and
    ``rounds`` (restoration searches run).  ``validate`` re-checks potential
    feasibility after every restoration round (O(m) each).
    """
    orig = _as_list(w)
    n = g.node_count
    src, dst = g.src, g.dst
    cur = [x if x >= 0 else 0 * x for x in orig]
    phi = [0 * orig[0]] * n if orig else []
    neg_in: dict[int, list[int]] = {}
    for k, x in enumerate(orig):
        if x < 0:
            neg_in.setdefault(dst[k], []).append(k)
    insertions = rounds = 0
    for v in sorted(neg_in):
        # break amount of every restored edge w.r.t. the current potential
        broken = {}
        for k in neg_in[v]:
            b = phi[src[k]] - phi[v] - orig[k]
            if b > 0:
                broken[src[k]] = b
        if broken:
            bound = max(broken.values())
            tree, ins = _dijkstra(g, cur, phi, v, bound=bound, stop=broken)
            insertions += ins
            rounds += 1
            if tree is None:
                if work is not None:
                    work.update(insertions=insertions, rounds=rounds)
                return NEGATIVE_CYCLE
            for x, d in tree.items():
                phi[x] += bound - d
        for k in neg_in[v]:
            cur[k] = orig[k]
        if validate and not is_feasible(g, cur, phi):
            raise ContractViolation(f"potential infeasible after restoring in-edges of node {v}")
    dist, ins = _dijkstra(g, cur, phi, source)
    insertions += ins
    if work is not None:
        work.update(insertions=insertions, rounds=rounds)
    out = np.full(n, _INF)
    for x, d in dist.items():
        out[x] = d + phi[source] - phi[x]
    return out
