"""Node potentials: reduced edge weights, feasibility, and repair after a weight decrease.

With potential ``phi`` the reduced weight of edge ``(u, v)`` is
``w(u, v) + phi[v] - phi[u]``.  Cycle weights do not depend on ``phi``, so a
potential with all reduced weights non-negative certifies that there is no
negative cycle.

Decreasing ``w(u, v)`` to ``c`` breaks the edge when its new reduced weight is
negative; the break amount is ``B = -(c + phi[v] - phi[u])``.  A forward repair
raises ``phi[x]`` by ``max(0, B - D(x))`` with ``D`` the reduced distance from
``v``; a backward repair lowers ``phi[x]`` by ``max(0, B - D(x))`` with ``D`` the
reduced distance to ``u``.  Both only need distances below ``B``.
"""
from __future__ import annotations

import heapq
import math
from typing import Mapping, Sequence

import numpy as np

from .graph import Graph

__all__ = [
    "ContractViolation",
    "potential_weight",
    "reduced_weights",
    "is_feasible",
    "break_amount",
    "pruned_distances",
    "forward_increases",
    "backward_decreases",
    "repair_forward",
    "repair_backward",
]


class ContractViolation(RuntimeError):
    """A precondition of a potential operation does not hold."""


def potential_weight(g: Graph, w: Sequence, phi: Sequence, e: int):
    return w[e] + phi[g.dst[e]] - phi[g.src[e]]


def reduced_weights(g: Graph, w, phi) -> np.ndarray:
    w = np.asarray(w)
    phi = np.asarray(phi)
    return w + phi[g.targets] - phi[g.sources]


def is_feasible(g: Graph, w, phi) -> bool:
    return bool(np.all(reduced_weights(g, w, phi) >= 0))


def break_amount(g: Graph, phi: Sequence, e: int, new_weight):
    """``B_uv`` for setting edge ``e`` to ``new_weight``; repair is needed iff it is positive."""
    return phi[g.src[e]] - phi[g.dst[e]] - new_weight


def pruned_distances(g: Graph, w: Sequence, phi: Sequence, source: int, bound=math.inf, reverse: bool = False) -> dict:
    """Exact reduced distances from ``source`` (to ``source`` if ``reverse``) that are below ``bound``.

    Plain lazy-deletion Dijkstra; assumes ``phi`` is feasible.
    """
    src, dst, off = g.src, g.dst, g.off
    dist = {source: 0}
    done = set()
    heap = [(0, source)]
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if reverse:
            arcs = ((k, src[k]) for k in g.in_edges(x))
        else:
            arcs = ((k, dst[k]) for k in range(off[x], off[x + 1]))
        for k, y in arcs:
            if y in done:
                continue
            r = w[k] + phi[y] - phi[x] if not reverse else w[k] + phi[x] - phi[y]
            nd = d + r
            if nd < bound and (y not in dist or nd < dist[y]):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return {x: dist[x] for x in done}


def forward_increases(radius, dist: Mapping) -> dict:
    """Sparse ``phi`` increments ``radius - D(x)`` for every ``x`` with ``D(x) < radius``."""
    return {x: radius - d for x, d in dist.items() if d < radius}


def backward_decreases(radius, dist: Mapping) -> dict:
    """Sparse ``phi`` increments ``-(radius - D(x))`` for every ``x`` with ``D(x) < radius``."""
    return {x: d - radius for x, d in dist.items() if d < radius}


def _apply(phi: Sequence, delta: Mapping) -> list:
    out = list(phi)
    for x, dx in delta.items():
        out[x] += dx
    return out


def repair_forward(g: Graph, w: Sequence, phi: Sequence, e: int, new_weight, dist: Mapping) -> list:
    """Potential that is feasible after setting ``w[e] = new_weight``, raising potentials around ``v``.

    ``dist`` holds reduced distances from ``v`` (w.r.t. the current weights)
    for at least every node closer than ``B``.  Raises ``ContractViolation`` if
    ``u`` is closer than ``B``, i.e. the update closes a negative cycle.
    """
    bound = break_amount(g, phi, e, new_weight)
    if bound <= 0:
        return list(phi)
    u = g.src[e]
    if u in dist and dist[u] < bound:
        raise ContractViolation("update closes a negative cycle")
    return _apply(phi, forward_increases(bound, dist))


def repair_backward(g: Graph, w: Sequence, phi: Sequence, e: int, new_weight, dist: Mapping) -> list:
    """Mirror of ``repair_forward``: ``dist`` holds reduced distances to ``u``; potentials around ``u`` drop."""
    bound = break_amount(g, phi, e, new_weight)
    if bound <= 0:
        return list(phi)
    v = g.dst[e]
    if v in dist and dist[v] < bound:
        raise ContractViolation("update closes a negative cycle")
    return _apply(phi, backward_decreases(bound, dist))
