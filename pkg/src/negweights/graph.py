"""Directed graphs in compressed sparse row form, generators, SCCs and edge-list I/O.

Every edge is stored as a full ``(source, target)`` pair in one flat array sorted
by source, so a uniform random edge is a uniform random index into that array.
"""
from __future__ import annotations

import os
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Graph",
    "build_graph",
    "strongly_connected_components",
    "scc_labels",
    "induced_subgraph",
    "largest_scc_subgraph",
    "gen_gnp",
    "gen_dsf",
    "gen_cycle",
    "gen_doubly_linked_path",
    "load_edge_list",
    "save_edge_list",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Graph:
    """Immutable directed graph without self-loops or parallel edges.

    Edge ``k`` is ``(sources[k], targets[k])``; edges are sorted by source and,
    within one source, by target.  ``offsets[x]:offsets[x + 1]`` spans the
    out-edges of ``x``.  ``rev_edges[rev_offsets[x]:rev_offsets[x + 1]]`` lists
    the ids of the in-edges of ``x``, ordered by their source.

    ``labels`` maps compact node ids back to external ids when the graph was
    read from a file or extracted from a larger graph.
    """

    __slots__ = (
        "node_count",
        "edge_count",
        "sources",
        "targets",
        "offsets",
        "rev_offsets",
        "rev_edges",
        "labels",
        "src",
        "dst",
        "off",
        "roff",
        "redge",
    )

    def __init__(self, node_count: int, sources, targets, labels=None):
        sources = np.asarray(sources, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        n = int(node_count)
        m = len(sources)
        self.node_count = n
        self.edge_count = m
        self.sources = _frozen(sources.copy())
        self.targets = _frozen(targets.copy())
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(sources, minlength=n), out=offsets[1:])
        self.offsets = _frozen(offsets)
        # in-edges grouped by target, ties by source (stable sort on target of a source-sorted list)
        rev = np.argsort(targets, kind="stable")
        roff = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(targets, minlength=n), out=roff[1:])
        self.rev_edges = _frozen(rev.astype(np.int64))
        self.rev_offsets = _frozen(roff)
        self.labels = None if labels is None else _frozen(np.asarray(labels, dtype=np.int64).copy())
        # plain lists: indexing these in Python loops is much faster than indexing numpy arrays
        self.src = self.sources.tolist()
        self.dst = self.targets.tolist()
        self.off = self.offsets.tolist()
        self.roff = self.rev_offsets.tolist()
        self.redge = self.rev_edges.tolist()

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def m(self) -> int:
        return self.edge_count

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src, self.dst))

    def out_edges(self, x: int) -> range:
        return range(self.off[x], self.off[x + 1])

    def in_edges(self, x: int) -> list[int]:
        return self.redge[self.roff[x] : self.roff[x + 1]]

    def out_degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.rev_offsets)

    def edge_id(self, u: int, v: int) -> int:
        """Index of edge ``(u, v)``; raises ``KeyError`` if absent."""
        lo, hi = self.off[u], self.off[u + 1]
        k = lo + int(np.searchsorted(self.targets[lo:hi], v))
        if k < hi and self.dst[k] == v:
            return k
        raise KeyError((u, v))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


def build_graph(edge_list: Iterable[tuple[int, int]] | np.ndarray, node_count: int | None = None, labels=None) -> Graph:
    """Build a CSR graph from ``(u, v)`` pairs, dropping duplicates and self-loops.

    Node ids must already be compact integers; ``node_count`` defaults to the
    largest id plus one.
    """
    arr = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("empty graph")
    arr = arr.reshape(-1, 2)
    if arr.min() < 0:
        raise ValueError("node ids must be non-negative")
    n = int(arr.max()) + 1 if node_count is None else int(node_count)
    if arr.max() >= n:
        raise ValueError(f"node id {int(arr.max())} out of range for {n} nodes")
    u, v = arr[:, 0], arr[:, 1]
    keep = u != v
    keys = np.unique(u[keep] * n + v[keep])
    return Graph(n, keys // n, keys % n, labels=labels)


def strongly_connected_components(g: Graph) -> list[list[int]]:
    """Tarjan's algorithm without recursion.

    Components are returned in the order Tarjan completes them (reverse
    topological order of the condensation); nodes inside a component are sorted.
    """
    n = g.node_count
    off, dst = g.off, g.dst
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        # frames hold (node, next out-edge position)
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        frames = [(root, off[root])]
        while frames:
            x, k = frames[-1]
            end = off[x + 1]
            descended = False
            while k < end:
                y = dst[k]
                k += 1
                if index[y] < 0:
                    frames[-1] = (x, k)
                    index[y] = low[y] = counter
                    counter += 1
                    stack.append(y)
                    on_stack[y] = True
                    frames.append((y, off[y]))
                    descended = True
                    break
                if on_stack[y] and index[y] < low[x]:
                    low[x] = index[y]
            if descended:
                continue
            frames.pop()
            if frames:
                p = frames[-1][0]
                if low[x] < low[p]:
                    low[p] = low[x]
            if low[x] == index[x]:
                comp = []
                while True:
                    y = stack.pop()
                    on_stack[y] = False
                    comp.append(y)
                    if y == x:
                        break
                comp.sort()
                comps.append(comp)
    return comps


def scc_labels(g: Graph) -> np.ndarray:
    """Component id per node (ids follow the order of ``strongly_connected_components``)."""
    labels = np.empty(g.node_count, dtype=np.int64)
    for i, comp in enumerate(strongly_connected_components(g)):
        labels[comp] = i
    return labels


def induced_subgraph(g: Graph, nodes: Sequence[int]) -> Graph:
    """Subgraph induced by ``nodes`` with ids compacted in ascending order.

    The result's ``labels`` refer to the external ids of ``g`` (or its node ids
    if ``g`` carries no labels).
    """
    nodes = np.unique(np.asarray(nodes, dtype=np.int64))
    remap = np.full(g.node_count, -1, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes))
    s, t = remap[g.sources], remap[g.targets]
    keep = (s >= 0) & (t >= 0)
    ext = nodes if g.labels is None else g.labels[nodes]
    if not keep.any():
        raise ValueError("empty graph")
    return build_graph(np.stack([s[keep], t[keep]], axis=1), node_count=len(nodes), labels=ext)


def largest_scc_subgraph(g: Graph) -> Graph:
    comps = strongly_connected_components(g)
    best = max(comps, key=len)
    return induced_subgraph(g, best)


def gen_gnp(n: int, avg_deg: float, rng: np.random.Generator) -> Graph:
    """Gilbert digraph: each ordered pair ``u != v`` is an edge with probability ``avg_deg / n``.

    Uses geometric skipping over the ``n (n - 1)`` candidate pairs, so the work
    is proportional to the number of edges produced.
    """
    if not 0 < avg_deg < n:
        raise ValueError("need 0 < avg_deg < n")
    p = avg_deg / n
    total = n * (n - 1)
    chunk = max(1024, int(1.2 * p * total) + 64)
    picks = []
    pos = -1
    while True:
        gaps = rng.geometric(p, size=chunk)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            picks.append(idx[idx < total])
            break
        picks.append(idx)
        pos = int(idx[-1])
    idx = np.concatenate(picks)
    u = idx // (n - 1)
    j = idx % (n - 1)
    v = j + (j >= u)
    if len(idx) == 0:
        raise ValueError("empty graph")
    return Graph(n, u, v)


def gen_dsf(
    n: int,
    beta: float,
    rng: np.random.Generator,
    delta_in: float = 1.0,
    delta_out: float = 1.0,
) -> Graph:
    """Directed scale-free graph (Bollobas, Borgs, Chayes, Riordan) with ``alpha = gamma = (1 - beta) / 2``.

    Grows from a directed triangle until ``n`` nodes exist.  Each step either
    adds a new node with an edge to an existing node chosen by in-degree
    (``alpha``), an edge between existing nodes chosen by out- and in-degree
    (``beta``), or a new node with an edge from an existing node chosen by
    out-degree (``gamma``).  Multi-edges and self-loops are dropped afterwards.
    """
    if not 0 < beta < 1:
        raise ValueError("need 0 < beta < 1")
    if n < 3:
        raise ValueError("need n >= 3")
    alpha = (1.0 - beta) / 2
    src = [0, 1, 2]
    dst = [1, 2, 0]
    nodes = 3
    block = 4096
    while nodes < n:
        draws = rng.random((block, 3)).tolist()
        for r_kind, r_a, r_b in draws:
            m = len(src)
            if r_kind < alpha:
                w = _pick(dst, m, nodes, delta_in, r_a)
                src.append(nodes)
                dst.append(w)
                nodes += 1
            elif r_kind < alpha + beta:
                v = _pick(src, m, nodes, delta_out, r_a)
                w = _pick(dst, m, nodes, delta_in, r_b)
                src.append(v)
                dst.append(w)
            else:
                v = _pick(src, m, nodes, delta_out, r_a)
                src.append(v)
                dst.append(nodes)
                nodes += 1
            if nodes >= n:
                break
    return build_graph(np.stack([np.asarray(src), np.asarray(dst)], axis=1), node_count=n)


def _pick(endpoints: list[int], m: int, nodes: int, delta: float, r: float) -> int:
    # P(x) = (deg(x) + delta) / (m + delta * nodes); one uniform decides both the branch and the index
    x = r * (m + delta * nodes)
    if x < m:
        return endpoints[int(x)]
    return min(int((x - m) / delta), nodes - 1)


def gen_cycle(n: int) -> Graph:
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    u = np.arange(n)
    return build_graph(np.stack([u, (u + 1) % n], axis=1), node_count=n)


def gen_doubly_linked_path(k: int) -> Graph:
    """Path on ``k + 1`` nodes with both directions of every edge (``2k`` edges)."""
    if k < 1:
        raise ValueError("path needs k >= 1")
    u = np.arange(k)
    fwd = np.stack([u, u + 1], axis=1)
    return build_graph(np.concatenate([fwd, fwd[:, ::-1]]), node_count=k + 1)


def load_edge_list(path: str | os.PathLike) -> Graph:
    """Read a whitespace-separated ``u v`` edge list; ``#`` lines are comments.

    External ids are compacted to ``0..n-1`` in ascending order and kept in
    ``Graph.labels``.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tokens = s.split()
            if len(tokens) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {s!r}")
            try:
                pairs.append((int(tokens[0]), int(tokens[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer node id in {s!r}") from None
    if not pairs:
        raise ValueError("empty graph")
    arr = np.asarray(pairs, dtype=np.int64)
    ext, compact = np.unique(arr, return_inverse=True)
    return build_graph(compact.reshape(-1, 2), node_count=len(ext), labels=ext)


def save_edge_list(g: Graph, path: str | os.PathLike, header: Sequence[str] = ()) -> None:
    ids = np.arange(g.node_count) if g.labels is None else g.labels
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for u, v in zip(ids[g.sources].tolist(), ids[g.targets].tolist()):
            fh.write(f"{u} {v}\n")
