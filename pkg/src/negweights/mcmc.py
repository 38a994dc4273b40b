"""The edge-resampling Markov chain over consistent weight assignments.

Each step picks a uniform edge and a uniform weight from the domain and keeps
the change iff the graph stays free of negative cycles.  The chain is
symmetric, aperiodic and irreducible on the consistent set, so it converges to
the uniform distribution over it.
"""
from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .checkers import Checker, make_checker
from .graph import Graph, strongly_connected_components
from .potential import ContractViolation, is_feasible
from .weights import WeightDomain, feasible_potential, initial_weights, is_consistent_oracle

__all__ = [
    "RNG_NAME",
    "THREADS_ENV",
    "make_rng",
    "ProposalStream",
    "ChainState",
    "StepStats",
    "Checkpoint",
    "RunStats",
    "mcmc_step",
    "run_chain",
    "run_ensemble",
    "checkpoint_schedule",
    "LockstepReport",
    "CheckerDisagreement",
    "compare_checkers",
]

RNG_NAME = "numpy.PCG64"
THREADS_ENV = "NEGWEIGHTS_THREADS"
STATS_COLUMNS = (
    "steps",
    "accepted",
    "acc_rate",
    "mean_weight",
    "frac_negative",
    "mean_ins_accepted",
    "mean_ins_rejected",
    "ns_per_step",
)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


class ProposalStream:
    """Uniform (edge, weight) proposals drawn from ``rng`` in fixed-size blocks.

    The sequence depends only on the rng state and the block size, not on
    how it is consumed.
    """

    def __init__(self, edge_count: int, domain: WeightDomain, rng: np.random.Generator, block: int = 8192):
        self.edge_count = edge_count
        self.domain = domain
        self.rng = rng
        self.block = block
        self._edges: list = []
        self._weights: list = []
        self._pos = 0

    def _refill(self):
        self._edges = self.rng.integers(0, self.edge_count, size=self.block).tolist()
        self._weights = self.domain.sample(self.rng, self.block).tolist()
        self._pos = 0

    def next(self) -> tuple:
        if self._pos >= len(self._edges):
            self._refill()
        i = self._pos
        self._pos = i + 1
        return self._edges[i], self._weights[i]

    def take(self, k: int) -> tuple[list, list]:
        edges, weights = [], []
        while k > 0:
            if self._pos >= len(self._edges):
                self._refill()
            j = min(len(self._edges), self._pos + k)
            edges.extend(self._edges[self._pos : j])
            weights.extend(self._weights[self._pos : j])
            k -= j - self._pos
            self._pos = j
        return edges, weights


class ChainState:
    """Weights, potential and proposal source of one chain.

    ``w`` and ``phi`` are plain lists of Python ints (discrete domain) or
    floats (continuous domain).  The potential starts at 0, which is feasible
    for non-negative weights; other starting weights get the Bellman-Ford
    potential and must be consistent.
    """

    def __init__(self, g: Graph, domain: WeightDomain, weights, rng: np.random.Generator):
        w = np.asarray(weights).astype(domain.dtype)
        if len(w) != g.edge_count:
            raise ValueError("weight vector length does not match edge count")
        self.graph = g
        self.domain = domain
        self.w = w.tolist()
        if w.min() >= 0:
            self.phi = [domain.zero] * g.node_count
        else:
            self.phi = feasible_potential(g, w).astype(domain.dtype).tolist()
        self.step = 0
        self.rng = rng
        self.proposals = ProposalStream(g.edge_count, domain, rng)

    @classmethod
    def initial(cls, g: Graph, domain: WeightDomain, init: str, seed: int) -> ChainState:
        rng = make_rng(seed)
        return cls(g, domain, initial_weights(g, domain, init, rng), rng)

    def weights(self) -> np.ndarray:
        return np.asarray(self.w, dtype=self.domain.dtype)

    def potential(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=self.domain.dtype)

    def apply(self, edge: int, new_weight, delta: dict) -> None:
        self.w[edge] = new_weight
        phi = self.phi
        for x, dx in delta.items():
            phi[x] += dx


@dataclass(frozen=True)
class StepStats:
    edge: int
    old_weight: float
    new_weight: float
    accepted: bool
    insertions: int
    searched: bool

    @property
    def decrease(self) -> bool:
        return self.new_weight < self.old_weight


def mcmc_step(state: ChainState, checker: Checker) -> tuple[bool, StepStats]:
    """Propose one uniform (edge, weight) pair and apply it if it keeps the weights consistent."""
    e, c = state.proposals.next()
    old = state.w[e]
    verdict = checker.check(state.w, state.phi, e, c)
    if verdict.accepted:
        state.apply(e, c, verdict.potential_delta)
    state.step += 1
    return verdict.accepted, StepStats(e, old, c, verdict.accepted, verdict.insertions, verdict.searched)


@dataclass
class Checkpoint:
    steps: int
    accepted: int
    acc_rate: float
    mean_weight: float
    frac_negative: float
    mean_ins_accepted: float
    mean_ins_rejected: float
    ns_per_step: float

    def row(self) -> list:
        return [getattr(self, c) for c in STATS_COLUMNS]


@dataclass
class RunStats:
    """Checkpointed telemetry of one chain.

    Insertion means are taken over weight-decrease proposals only (increases
    never search), split by verdict; they are NaN until the first such step.
    """

    records: list = field(default_factory=list)
    header: dict = field(default_factory=dict)

    @property
    def final(self) -> Checkpoint:
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        return np.asarray([getattr(r, name) for r in self.records])

    def to_csv(self, path, wall_clock: bool = True) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for k, v in self.header.items():
                fh.write(f"# {k}={v}\n")
            fh.write(",".join(STATS_COLUMNS) + "\n")
            for r in self.records:
                cells = [_fmt_cell(x) for x in r.row()]
                if not wall_clock:
                    cells[-1] = ""
                fh.write(",".join(cells) + "\n")


def _fmt_cell(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def checkpoint_schedule(steps: int) -> list[int]:
    """Powers of two up to ``steps`` plus ``steps`` itself."""
    out = []
    p = 1
    while p < steps:
        out.append(p)
        p *= 2
    out.append(steps)
    return out


def _snapshot(state: ChainState, accepted, n_acc, ins_acc, n_rej, ins_rej, elapsed, interval) -> Checkpoint:
    w = np.asarray(state.w)
    steps = state.step
    return Checkpoint(
        steps=steps,
        accepted=accepted,
        acc_rate=accepted / steps if steps else math.nan,
        mean_weight=float(w.mean()),
        frac_negative=float(np.count_nonzero(w < 0)) / len(w),
        mean_ins_accepted=ins_acc / n_acc if n_acc else math.nan,
        mean_ins_rejected=ins_rej / n_rej if n_rej else math.nan,
        ns_per_step=elapsed * 1e9 / interval if interval else math.nan,
    )


def run_chain(
    g: Graph,
    domain: WeightDomain,
    steps: int | None = None,
    checker: str = "bidijkstra",
    init: str = "uniform",
    seed: int = 0,
    checkpoints: Iterable[int] | None = None,
    audit: bool = False,
) -> tuple[np.ndarray, RunStats]:
    """Run the chain for ``steps`` proposals (default ``100 * m``).

    Returns the final weights and stats at the checkpoint step counts
    (default: powers of two plus the last step).  With ``audit`` the weights
    are verified against the Bellman-Ford oracle at every checkpoint, and in
    a discrete domain the potential is verified feasible as well.
    """
    if steps is None:
        steps = 100 * g.edge_count
    if len(strongly_connected_components(g)) > 1:
        warnings.warn("graph is not strongly connected; edges outside cycles are sampled trivially", stacklevel=2)
    state = ChainState.initial(g, domain, init, seed)
    chk = make_checker(checker, g)
    marks = sorted(set(int(c) for c in checkpoints)) if checkpoints is not None else checkpoint_schedule(steps)
    marks = [c for c in marks if 0 < c <= steps]
    if not marks or marks[-1] != steps:
        marks.append(steps)
    stats = RunStats(
        header={
            "rng": RNG_NAME,
            "seed": seed,
            "checker": chk.name,
            "init": init,
            "domain": domain.describe(),
            "steps": steps,
            "n": g.node_count,
            "m": g.edge_count,
        }
    )
    accepted = n_acc = n_rej = ins_acc = ins_rej = 0
    w, stream, check = state.w, state.proposals, chk.check
    for mark in marks:
        todo = mark - state.step
        t0 = time.perf_counter()
        edges, values = stream.take(todo)
        for e, c in zip(edges, values):
            old = w[e]
            v = check(w, state.phi, e, c)
            if v.accepted:
                accepted += 1
                w[e] = c
                if v.potential_delta:
                    phi = state.phi
                    for x, dx in v.potential_delta.items():
                        phi[x] += dx
                if c < old:
                    n_acc += 1
                    ins_acc += v.insertions
            else:
                n_rej += 1
                ins_rej += v.insertions
        state.step = mark
        elapsed = time.perf_counter() - t0
        stats.records.append(_snapshot(state, accepted, n_acc, ins_acc, n_rej, ins_rej, elapsed, todo))
        if audit:
            _audit(state)
    return state.weights(), stats


def _audit(state: ChainState) -> None:
    g = state.graph
    if not is_consistent_oracle(g, state.weights()):
        raise ContractViolation(f"weights inconsistent at step {state.step}")
    if state.domain.discrete and not is_feasible(g, state.weights(), state.potential()):
        raise ContractViolation(f"potential infeasible at step {state.step}")


def _run_one(args):
    g, domain, steps, checker, init, seed, checkpoints = args
    return run_chain(g, domain, steps, checker, init, seed, checkpoints)


def run_ensemble(
    g: Graph,
    domain: WeightDomain,
    steps: int | None,
    checker: str,
    init: str,
    seeds: Sequence[int],
    parallelism: int | None = None,
    checkpoints: Iterable[int] | None = None,
) -> list[tuple[np.ndarray, RunStats]]:
    """Independent chains, one per seed; results are in seed order and equal to sequential runs.

    ``parallelism`` defaults to the ``NEGWEIGHTS_THREADS`` environment
    variable (or 1) and sets the number of worker processes.
    """
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if parallelism is None:
        parallelism = int(os.environ.get(THREADS_ENV, "1"))
    cps = None if checkpoints is None else list(checkpoints)
    jobs = [(g, domain, steps, checker, init, s, cps) for s in seeds]
    if parallelism <= 1 or len(jobs) <= 1:
        return [_run_one(j) for j in jobs]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(_run_one, jobs))


class CheckerDisagreement(AssertionError):
    pass


@dataclass
class LockstepReport:
    """Work of several checkers on one shared proposal stream (decrease proposals only)."""

    steps: int
    accepted: int
    decreases: int
    accepted_decreases: int
    insertions_accepted: dict
    insertions_rejected: dict

    def mean_insertions(self, kind: str, accepted: bool) -> float:
        if accepted:
            n, tot = self.accepted_decreases, self.insertions_accepted[kind]
        else:
            n, tot = self.decreases - self.accepted_decreases, self.insertions_rejected[kind]
        return tot / n if n else math.nan


def _locally_feasible(g: Graph, w, phi, edge: int, delta: dict) -> bool:
    """Reduced weights of ``edge`` and of every edge at a node in ``delta`` are non-negative.

    Only these reduced weights can change in one step, so if the potential was
    feasible before the step this is equivalent to a full ``is_feasible`` check.
    """
    src, dst, off, roff, redge = g.src, g.dst, g.off, g.roff, g.redge
    if w[edge] + phi[dst[edge]] - phi[src[edge]] < 0:
        return False
    for x in delta:
        px = phi[x]
        for k in range(off[x], off[x + 1]):
            if w[k] + phi[dst[k]] - px < 0:
                return False
        for j in range(roff[x], roff[x + 1]):
            k = redge[j]
            if w[k] + px - phi[src[k]] < 0:
                return False
    return True


def compare_checkers(
    g: Graph,
    domain: WeightDomain,
    steps: int,
    kinds: Sequence[str] = ("bf", "dijkstra", "bidijkstra"),
    init: str = "uniform",
    seed: int = 0,
    burn_in: int = 0,
    check_feasible: bool = False,
) -> LockstepReport:
    """Drive one chain per checker with the same proposals and demand identical verdicts.

    ``burn_in`` steps run first with the bidirectional checker (not measured);
    every checker then starts from the burnt-in weights and its own copy of
    the potential.  Raises ``CheckerDisagreement`` on the first differing
    verdict, and ``ContractViolation`` if ``check_feasible`` is set and some
    maintained potential stops being feasible (checked after every accepted
    step on the edges whose reduced weight moved, plus a full check at the end).
    """
    base = ChainState.initial(g, domain, init, seed)
    if burn_in:
        burn = make_checker("bidijkstra", g)
        for _ in range(burn_in):
            mcmc_step(base, burn)
    checkers = [make_checker(k, g) for k in kinds]
    ws = [list(base.w) for _ in kinds]
    phis = [list(base.phi) for _ in kinds]
    ins_acc = {k: 0 for k in kinds}
    ins_rej = {k: 0 for k in kinds}
    accepted = decreases = acc_dec = 0
    edges, values = base.proposals.take(steps)
    for t, (e, c) in enumerate(zip(edges, values)):
        verdicts = [chk.check(w, phi, e, c) for chk, w, phi in zip(checkers, ws, phis)]
        bits = {v.accepted for v in verdicts}
        if len(bits) != 1:
            detail = ", ".join(f"{k}={v.accepted}" for k, v in zip(kinds, verdicts))
            raise CheckerDisagreement(f"step {t}: edge {e} -> {c}: {detail}")
        ok = verdicts[0].accepted
        dec = c < ws[0][e]
        if dec:
            decreases += 1
            acc_dec += ok
        for k, v in zip(kinds, verdicts):
            if dec:
                (ins_acc if ok else ins_rej)[k] += v.insertions
        if not ok:
            continue
        accepted += 1
        for chk, w, phi, v in zip(checkers, ws, phis, verdicts):
            w[e] = c
            for x, dx in v.potential_delta.items():
                phi[x] += dx
            if check_feasible and chk.uses_potential and not _locally_feasible(g, w, phi, e, v.potential_delta):
                raise ContractViolation(f"step {t}: {chk.name} potential infeasible")
    if check_feasible:
        for chk, w, phi in zip(checkers, ws, phis):
            if chk.uses_potential and not is_feasible(g, w, phi):
                raise ContractViolation(f"{chk.name} potential infeasible at the end of the run")
    return LockstepReport(steps, accepted, decreases, acc_dec, ins_acc, ins_rej)
