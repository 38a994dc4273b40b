"""Consistency checks for a single-edge weight update.

Given consistent weights ``w`` and a proposal to set edge ``e = (u, v)`` to
``c``, the update stays consistent iff no ``v -> u`` path is shorter than
``-c``.  Three interchangeable checkers decide this:

* ``BellmanFordChecker``: SPFA from ``v`` on the raw weights.
* ``DijkstraChecker``: Dijkstra from ``v`` on reduced weights, pruned at the
  break amount ``B``, then a forward potential repair.
* ``BiDijkstraChecker``: alternating searches from ``v`` and (backwards) from
  ``u``; the repair is split between both endpoints.

All checkers return the same accept bit for the same input; the potential
updates differ.  Weight increases are accepted without any search.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Sequence

import numpy as np

from .graph import Graph
from .potential import ContractViolation, is_feasible

__all__ = [
    "CHECKERS",
    "Proposal",
    "Verdict",
    "Checker",
    "BellmanFordChecker",
    "DijkstraChecker",
    "BiDijkstraChecker",
    "make_checker",
    "check_bellman_ford",
    "check_dijkstra",
    "check_bidijkstra",
]

_INF = math.inf


@dataclass(frozen=True)
class Proposal:
    edge: int
    new_weight: float


@dataclass
class Verdict:
    """Outcome of one check.

    ``potential_delta`` maps node -> change of its potential; it is only
    meaningful on accept and is empty for the Bellman-Ford checker.
    ``searched`` is False when the verdict needed no search at all.
    """

    accepted: bool
    insertions: int = 0
    settled: int = 0
    searched: bool = False
    potential_delta: dict = field(default_factory=dict)


_TRIVIAL = Verdict(True)


class _Stamps:
    """Per-node scratch arrays invalidated in O(1) by bumping a generation counter."""

    __slots__ = ("gen", "label_gen", "dist", "done_gen")

    def __init__(self, n: int):
        self.gen = 0
        self.label_gen = [0] * n
        self.dist = [0] * n
        self.done_gen = [0] * n


class Checker:
    name = "checker"
    uses_potential = True

    def __init__(self, g: Graph):
        self.g = g

    def check(self, w: Sequence, phi: Sequence, edge: int, new_weight) -> Verdict:
        raise NotImplementedError

    def __call__(self, w, phi, proposal: Proposal) -> Verdict:
        return self.check(w, phi, proposal.edge, proposal.new_weight)


class BellmanFordChecker(Checker):
    """SPFA (deque + in-queue flag) from ``v`` on raw weights; ``phi`` is ignored."""

    name = "bf"
    uses_potential = False

    def __init__(self, g: Graph):
        super().__init__(g)
        self._s = _Stamps(g.node_count)
        self._inq = [0] * g.node_count

    def check(self, w, phi, edge, new_weight):
        if new_weight >= w[edge]:
            return _TRIVIAL
        g = self.g
        off, dst = g.off, g.dst
        u = g.src[edge]
        v = dst[edge]
        limit = -new_weight
        s = self._s
        s.gen += 1
        gen = s.gen
        label, dist, inq = s.label_gen, s.dist, self._inq
        label[v] = gen
        dist[v] = 0
        inq[v] = gen
        queue = deque((v,))
        ins = 1
        pops = 0
        while queue:
            x = queue.popleft()
            inq[x] = 0
            pops += 1
            dx = dist[x]
            for k in range(off[x], off[x + 1]):
                y = dst[k]
                nd = dx + w[k]
                if label[y] != gen or nd < dist[y]:
                    dist[y] = nd
                    label[y] = gen
                    if y == u and nd < limit:
                        return Verdict(False, ins, pops, True)
                    if inq[y] != gen:
                        inq[y] = gen
                        queue.append(y)
                        ins += 1
        return Verdict(True, ins, pops, True)


class DijkstraChecker(Checker):
    """Pruned Dijkstra from ``v`` on reduced weights with a forward repair on accept.

    With ``zero_dfs`` (default) nodes reached over reduced weight 0 from the
    node just settled are settled immediately by a depth-first scan instead of
    going through the priority queue.
    """

    name = "dijkstra"

    def __init__(self, g: Graph, zero_dfs: bool = True):
        super().__init__(g)
        self.zero_dfs = zero_dfs
        self._s = _Stamps(g.node_count)

    def check(self, w, phi, edge, new_weight):
        if new_weight >= w[edge]:
            return _TRIVIAL
        g = self.g
        off, dst = g.off, g.dst
        u = g.src[edge]
        v = dst[edge]
        bound = phi[u] - phi[v] - new_weight
        if bound <= 0:
            return _TRIVIAL
        zero_dfs = self.zero_dfs
        s = self._s
        s.gen += 1
        gen = s.gen
        label, dist, done = s.label_gen, s.dist, s.done_gen
        zero = bound - bound
        label[v] = gen
        dist[v] = zero
        heap = [(zero, v)]
        ins = 1
        tree = []
        while heap:
            d, x = heappop(heap)
            if done[x] == gen:
                continue
            done[x] = gen
            tree.append(x)
            stack = [x]
            while stack:
                y = stack.pop()
                py = phi[y]
                for k in range(off[y], off[y + 1]):
                    z = dst[k]
                    if done[z] == gen:
                        continue
                    r = w[k] + phi[z] - py
                    nd = d + r
                    if nd >= bound:
                        continue
                    if z == u:
                        return Verdict(False, ins, len(tree), True)
                    if zero_dfs and r == 0:
                        done[z] = gen
                        label[z] = gen
                        dist[z] = d
                        tree.append(z)
                        stack.append(z)
                    elif label[z] != gen or nd < dist[z]:
                        label[z] = gen
                        dist[z] = nd
                        heappush(heap, (nd, z))
                        ins += 1
        delta = {x: bound - dist[x] for x in tree}
        return Verdict(True, ins, len(tree), True, delta)


class BiDijkstraChecker(Checker):
    """Alternating forward (from ``v``) and backward (to ``u``) pruned Dijkstra.

    One node is settled per turn, forward first.  The search rejects as soon
    as some node has forward + backward label below ``B`` and accepts once
    either queue is empty or the two smallest queue keys sum to at least ``B``.

    On accept the forward radius ``r_f`` (smallest unsettled forward key, or
    infinity) gives ``delta_v = min(r_f, B)`` and ``delta_u = B - delta_v``.
    Every node closer than its side's share is settled at that point, so the
    forward and backward repairs use exact distances.
    """

    name = "bidijkstra"

    def __init__(self, g: Graph):
        super().__init__(g)
        self._f = _Stamps(g.node_count)
        self._b = _Stamps(g.node_count)

    def check(self, w, phi, edge, new_weight):
        if new_weight >= w[edge]:
            return _TRIVIAL
        g = self.g
        off, dst, src = g.off, g.dst, g.src
        roff, redge = g.roff, g.redge
        u = src[edge]
        v = dst[edge]
        bound = phi[u] - phi[v] - new_weight
        if bound <= 0:
            return _TRIVIAL
        f, b = self._f, self._b
        f.gen += 1
        b.gen += 1
        fgen, bgen = f.gen, b.gen
        flab, fdist, fdone = f.label_gen, f.dist, f.done_gen
        blab, bdist, bdone = b.label_gen, b.dist, b.done_gen
        zero = bound - bound
        flab[v] = fgen
        fdist[v] = zero
        blab[u] = bgen
        bdist[u] = zero
        fheap = [(zero, v)]
        bheap = [(zero, u)]
        ins = 2
        ftree = []
        btree = []
        forward = True
        while True:
            while fheap and fdone[fheap[0][1]] == fgen:
                heappop(fheap)
            while bheap and bdone[bheap[0][1]] == bgen:
                heappop(bheap)
            if not fheap or not bheap or fheap[0][0] + bheap[0][0] >= bound:
                break
            if forward:
                d, x = heappop(fheap)
                fdone[x] = fgen
                ftree.append(x)
                px = phi[x]
                for k in range(off[x], off[x + 1]):
                    y = dst[k]
                    if fdone[y] == fgen:
                        continue
                    nd = d + w[k] + phi[y] - px
                    if nd >= bound:
                        continue
                    if flab[y] != fgen or nd < fdist[y]:
                        flab[y] = fgen
                        fdist[y] = nd
                        if blab[y] == bgen and nd + bdist[y] < bound:
                            return Verdict(False, ins, len(ftree) + len(btree), True)
                        heappush(fheap, (nd, y))
                        ins += 1
            else:
                d, x = heappop(bheap)
                bdone[x] = bgen
                btree.append(x)
                px = phi[x]
                for j in range(roff[x], roff[x + 1]):
                    k = redge[j]
                    y = src[k]
                    if bdone[y] == bgen:
                        continue
                    nd = d + w[k] + px - phi[y]
                    if nd >= bound:
                        continue
                    if blab[y] != bgen or nd < bdist[y]:
                        blab[y] = bgen
                        bdist[y] = nd
                        if flab[y] == fgen and nd + fdist[y] < bound:
                            return Verdict(False, ins, len(ftree) + len(btree), True)
                        heappush(bheap, (nd, y))
                        ins += 1
            forward = not forward
        radius_f = fheap[0][0] if fheap else _INF
        delta_v = bound if radius_f >= bound else radius_f
        delta_u = bound - delta_v
        delta = {}
        for x in ftree:
            dx = fdist[x]
            if dx < delta_v:
                delta[x] = delta_v - dx
        if delta_u > 0:
            for x in btree:
                dx = bdist[x]
                if dx < delta_u:
                    if x in delta:
                        raise ContractViolation("forward and backward repair overlap")
                    delta[x] = dx - delta_u
        return Verdict(True, ins, len(ftree) + len(btree), True, delta)


CHECKERS = {
    "bf": BellmanFordChecker,
    "bellman-ford": BellmanFordChecker,
    "dijkstra": DijkstraChecker,
    "bidijkstra": BiDijkstraChecker,
}


def make_checker(kind: str, g: Graph) -> Checker:
    try:
        return CHECKERS[kind](g)
    except KeyError:
        raise ValueError(f"unknown checker {kind!r}; choose from bf, dijkstra, bidijkstra") from None


def _plain(x) -> list:
    return np.asarray(x).tolist()


def _one_shot(cls, g, w, phi, p):
    w = _plain(w)
    if phi is not None:
        phi = _plain(phi)
        if not is_feasible(g, w, phi):
            raise ContractViolation("phi is not a feasible potential for w")
    return cls(g).check(w, phi, p.edge, np.asarray(p.new_weight).item())


def check_bellman_ford(g: Graph, w, p: Proposal) -> Verdict:
    return _one_shot(BellmanFordChecker, g, w, None, p)


def check_dijkstra(g: Graph, w, phi, p: Proposal) -> Verdict:
    """One-off check; raises ``ContractViolation`` if ``phi`` is not feasible for ``w``."""
    return _one_shot(DijkstraChecker, g, w, phi, p)


def check_bidijkstra(g: Graph, w, phi, p: Proposal) -> Verdict:
    return _one_shot(BiDijkstraChecker, g, w, phi, p)
