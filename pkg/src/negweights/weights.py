"""Weight domains, weight assignments and the ground-truth consistency oracle."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph

__all__ = [
    "WeightDomain",
    "INIT_STRATEGIES",
    "sample_weight",
    "initial_weights",
    "is_consistent_oracle",
    "feasible_potential",
    "save_weights",
    "load_weights",
]

INIT_STRATEGIES = ("maximum", "zero", "uniform")
_INIT_ALIASES = {"max": "maximum", "uniform-nonnegative": "uniform"}


@dataclass(frozen=True)
class WeightDomain:
    """Either the integers ``{a, ..., b}`` (``discrete=True``) or the real interval ``[a, b]``."""

    a: float
    b: float
    discrete: bool = True

    def __post_init__(self):
        if self.discrete:
            if int(self.a) != self.a or int(self.b) != self.b:
                raise ValueError("discrete domain needs integer bounds")
            object.__setattr__(self, "a", int(self.a))
            object.__setattr__(self, "b", int(self.b))
        else:
            object.__setattr__(self, "a", float(self.a))
            object.__setattr__(self, "b", float(self.b))
        if self.a > self.b:
            raise ValueError(f"empty domain [{self.a}, {self.b}]")

    @classmethod
    def parse(cls, text: str, mode: str = "int") -> WeightDomain:
        """``"a:b"`` plus ``mode`` in ``{"int", "real"}``."""
        try:
            lo, hi = text.split(":")
        except ValueError:
            raise ValueError(f"domain must look like 'a:b', got {text!r}") from None
        if mode == "int":
            return cls(int(lo), int(hi), True)
        if mode == "real":
            return cls(float(lo), float(hi), False)
        raise ValueError(f"unknown weight mode {mode!r}")

    @property
    def size(self) -> int:
        """Number of values in a discrete domain."""
        if not self.discrete:
            raise ValueError("continuous domain has no finite size")
        return self.b - self.a + 1

    @property
    def zero(self):
        return 0 if self.discrete else 0.0

    @property
    def dtype(self):
        return np.int64 if self.discrete else np.float64

    def values(self) -> np.ndarray:
        return np.arange(self.a, self.b + 1, dtype=np.int64)

    def __contains__(self, x) -> bool:
        if self.discrete and int(x) != x:
            return False
        return self.a <= x <= self.b

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.discrete:
            return rng.integers(self.a, self.b, size=size, endpoint=True)
        return rng.uniform(self.a, self.b, size=size)

    def describe(self) -> str:
        return f"{self.a}:{self.b}:{'int' if self.discrete else 'real'}"


def sample_weight(domain: WeightDomain, rng: np.random.Generator):
    """One uniform draw from ``domain`` as a Python scalar."""
    return domain.sample(rng, 1).tolist()[0]


def initial_weights(g: Graph, domain: WeightDomain, strategy: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """Non-negative (hence consistent) starting weights.

    ``maximum`` sets every edge to ``max(domain)``, ``zero`` to 0 and
    ``uniform`` draws from the non-negative part of the domain.
    """
    strategy = _INIT_ALIASES.get(strategy, strategy)
    m = g.edge_count
    if domain.b < 0:
        raise ValueError(f"domain {domain.describe()} has no non-negative value to start from")
    if strategy == "maximum":
        return np.full(m, domain.b, dtype=domain.dtype)
    if strategy == "zero":
        if 0 not in domain:
            raise ValueError(f"strategy 'zero' needs 0 in domain {domain.describe()}")
        return np.zeros(m, dtype=domain.dtype)
    if strategy == "uniform":
        if rng is None:
            raise ValueError("strategy 'uniform' needs an rng")
        lo = max(domain.a, domain.zero)
        return WeightDomain(lo, domain.b, domain.discrete).sample(rng, m).astype(domain.dtype)
    raise ValueError(f"unknown init strategy {strategy!r}")


def _super_source_bellman_ford(g: Graph, w) -> np.ndarray | None:
    # round-based relaxation over all edges from a virtual node with 0-edges to every node
    w = np.asarray(w)
    dist = np.zeros(g.node_count, dtype=np.result_type(w.dtype, np.int64))
    src, dst = g.sources, g.targets
    for _ in range(g.node_count):
        cand = dist[src] + w
        new = dist.copy()
        np.minimum.at(new, dst, cand)
        if np.array_equal(new, dist):
            return dist
        dist = new
    return None


def is_consistent_oracle(g: Graph, w: Sequence) -> bool:
    """True iff no directed cycle has negative total weight (full Bellman-Ford)."""
    return _super_source_bellman_ford(g, w) is not None


def feasible_potential(g: Graph, w: Sequence) -> np.ndarray:
    """A feasible potential for consistent ``(g, w)``: minus the super-source distances."""
    dist = _super_source_bellman_ford(g, w)
    if dist is None:
        raise ValueError("weights contain a negative cycle")
    return -dist


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) and x > 0 else repr(x)
    return str(x)


def save_weights(g: Graph, w: Sequence, path: str | os.PathLike, header: Sequence[str] = ()) -> None:
    """CSV ``edge_index,source,target,weight`` preceded by ``#`` parameter lines."""
    ids = np.arange(g.node_count) if g.labels is None else g.labels
    src = ids[g.sources].tolist()
    dst = ids[g.targets].tolist()
    vals = np.asarray(w).tolist()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("edge_index,source,target,weight\n")
        for k, (u, v, x) in enumerate(zip(src, dst, vals)):
            fh.write(f"{k},{u},{v},{_fmt(x)}\n")


def load_weights(g: Graph, path: str | os.PathLike) -> np.ndarray:
    """Read a weight CSV written by ``save_weights`` (or any file with the same columns).

    Rows are matched to edges by ``(source, target)`` using the graph's external
    ids; every edge must be covered.  Integer-valued files load as int64.
    """
    ids = np.arange(g.node_count) if g.labels is None else g.labels
    lookup = {(int(ids[u]), int(ids[v])): k for k, (u, v) in enumerate(zip(g.src, g.dst))}
    vals: list = [None] * g.edge_count
    is_int = True
    with open(path, encoding="utf-8") as fh:
        header_seen = False
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if not header_seen:
                if s.replace(" ", "") != "edge_index,source,target,weight":
                    raise ValueError(f"{path}:{lineno}: unexpected header {s!r}")
                header_seen = True
                continue
            parts = s.split(",")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            key = (int(parts[1]), int(parts[2]))
            if key not in lookup:
                raise ValueError(f"{path}:{lineno}: edge {key} not in graph")
            tok = parts[3].strip()
            try:
                x = int(tok)
            except ValueError:
                x = float(tok)
                is_int = False
            vals[lookup[key]] = x
    missing = [k for k, x in enumerate(vals) if x is None]
    if missing:
        raise ValueError(f"{path}: no weight for {len(missing)} edge(s), e.g. edge {missing[0]}")
    return np.asarray(vals, dtype=np.int64 if is_int else np.float64)
