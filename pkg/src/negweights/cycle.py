"""Uniformity checks on the directed n-cycle.

On the cycle ``0 -> 1 -> ... -> n-1 -> 0`` a weight vector is consistent iff its
sum is non-negative, which makes exact counting and exact sampling easy and
gives a reference for the Markov chain.

Two chain engines are provided.  ``"vectorized"`` runs many independent
chains at once with numpy and decides consistency from the running cycle sum;
``"generic"`` runs each chain through ``ChainState`` and a real checker on
``gen_cycle(n)``.  Both implement the same proposal/accept rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .checkers import make_checker
from .graph import gen_cycle
from .mcmc import ChainState, make_rng, mcmc_step
from .weights import WeightDomain, initial_weights

__all__ = [
    "cycle_sum_counts",
    "enumerate_consistent_cycle",
    "encode_states",
    "decode_states",
    "exact_cycle_sampler",
    "exact_cycle_samples",
    "cycle_chains",
    "CoverageReport",
    "coverage_experiment",
    "histogram_bins",
    "weight_histogram",
]


def cycle_sum_counts(n: int, domain: WeightDomain) -> list[int]:
    """Number of vectors in ``domain**n`` per total sum; index ``i`` is sum ``n*a + i``.

    Repeated convolution with the all-ones vector of length ``b - a + 1``
    (exact Python integers).
    """
    if not domain.discrete:
        raise ValueError("counting needs a discrete domain")
    k = domain.size
    counts = [1]
    for _ in range(n):
        new = [0] * (len(counts) + k - 1)
        # sliding window sum of width k
        run = 0
        for i in range(len(new)):
            if i < len(counts):
                run += counts[i]
            if i - k >= 0:
                run -= counts[i - k]
            new[i] = run
        counts = new
    return counts


def enumerate_consistent_cycle(n: int, domain: WeightDomain) -> int:
    """Exact number of consistent weight vectors on the n-cycle."""
    counts = cycle_sum_counts(n, domain)
    lowest = n * domain.a
    return sum(c for i, c in enumerate(counts) if lowest + i >= 0)


def _radix(n: int, domain: WeightDomain) -> np.ndarray:
    base = domain.size
    if base**n >= 2**63:
        raise OverflowError("state space too large for int64 keys")
    return base ** np.arange(n, dtype=np.int64)


def encode_states(w: np.ndarray, domain: WeightDomain) -> np.ndarray:
    """Mixed-radix key per row: digit ``w[i] - a`` at place ``(b - a + 1) ** i``."""
    w = np.atleast_2d(np.asarray(w, dtype=np.int64))
    return (w - domain.a) @ _radix(w.shape[1], domain)


def decode_states(keys, n: int, domain: WeightDomain) -> np.ndarray:
    keys = np.atleast_1d(np.asarray(keys, dtype=np.int64))
    base = domain.size
    out = np.empty((len(keys), n), dtype=np.int64)
    rest = keys.copy()
    for i in range(n):
        out[:, i] = rest % base
        rest //= base
    return out + domain.a


def exact_cycle_samples(n: int, domain: WeightDomain, k: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """``k`` exactly uniform consistent vectors by rejection; also returns the number of draws used."""
    out = []
    got = draws = 0
    while got < k:
        batch = max(64, int(1.9 * (k - got)) + 16)
        cand = domain.sample(rng, batch * n).reshape(batch, n)
        ok = cand.sum(axis=1) >= 0
        acc = cand[ok]
        need = k - got
        if len(acc) > need:
            # draws up to and including the need-th accepted row
            last = int(np.flatnonzero(ok)[need - 1])
            draws += last + 1
            acc = acc[:need]
        else:
            draws += batch
        out.append(acc)
        got += len(acc)
    return np.concatenate(out), draws


def exact_cycle_sampler(n: int, domain: WeightDomain, rng: np.random.Generator) -> np.ndarray:
    """One exactly uniform consistent weight vector for the n-cycle."""
    if domain.b < 0:
        raise ValueError("domain has no non-negative value")
    while True:
        w = domain.sample(rng, n)
        if w.sum() >= 0:
            return w


def cycle_chains(
    n: int,
    domain: WeightDomain,
    steps: int,
    reps: int,
    rng: np.random.Generator,
    init: str = "zero",
    start: np.ndarray | None = None,
    checkpoints: Iterable[int] = (),
):
    """Run ``reps`` independent chains on the n-cycle for ``steps`` steps each.

    Returns the ``reps x n`` final weights, or with ``checkpoints`` a dict
    mapping each requested step count to a snapshot copy.
    """
    if start is None:
        g = gen_cycle(n)
        start = np.stack([initial_weights(g, domain, init, rng) for _ in range(reps)])
    W = np.array(start, dtype=domain.dtype)
    total = W.sum(axis=1)
    rows = np.arange(reps)
    marks = set(int(c) for c in checkpoints)
    snaps = {}
    if 0 in marks:
        snaps[0] = W.copy()
    for t in range(1, steps + 1):
        e = rng.integers(0, n, size=reps)
        c = domain.sample(rng, reps)
        new_total = total - W[rows, e] + c
        ok = new_total >= 0
        W[rows[ok], e[ok]] = c[ok]
        total = np.where(ok, new_total, total)
        if not domain.discrete and t % n == 0:
            total = W.sum(axis=1)
        if t in marks:
            snaps[t] = W.copy()
    return snaps if marks else W


def _generic_chains(n, domain, steps, reps, rng, init, checker, checkpoints=()):
    g = gen_cycle(n)
    chk = make_checker(checker, g)
    marks = sorted(set(int(c) for c in checkpoints))
    snaps = {c: np.empty((reps, n), dtype=domain.dtype) for c in marks}
    final = np.empty((reps, n), dtype=domain.dtype)
    seeds = rng.integers(0, 2**63, size=reps)
    for r in range(reps):
        state = ChainState.initial(g, domain, init, int(seeds[r]))
        if 0 in snaps:
            snaps[0][r] = state.weights()
        for t in range(1, steps + 1):
            mcmc_step(state, chk)
            if t in snaps:
                snaps[t][r] = state.weights()
        final[r] = state.weights()
    return snaps if marks else final


@dataclass
class CoverageReport:
    n: int
    domain: str
    tau: int
    source: str
    state_count: int
    total_samples_drawn: int
    distinct_states_seen: int
    target_count: int
    reached: bool
    samples_at_target: int | None

    @property
    def normalized(self) -> float:
        """Samples at target divided by the number of consistent states (NaN if not reached)."""
        return self.samples_at_target / self.state_count if self.reached else math.nan

    FIELDS = (
        "n",
        "domain",
        "tau",
        "source",
        "state_count",
        "total_samples_drawn",
        "distinct_states_seen",
        "target_count",
        "reached",
        "samples_at_target",
    )

    def row(self) -> list:
        return ["" if getattr(self, f) is None else getattr(self, f) for f in self.FIELDS]


def coverage_experiment(
    n: int,
    domain: WeightDomain,
    tau: int,
    rng: np.random.Generator,
    abort_multiplier: float = 10,
    source: str = "mcmc",
    target_fraction: float = 0.99,
    engine: str = "vectorized",
    checker: str = "bidijkstra",
    batch: int = 4096,
) -> CoverageReport:
    """Count independent samples until ``target_fraction`` of all consistent states were seen.

    With ``source="mcmc"`` every sample is the endpoint of a fresh chain run
    for ``tau`` steps from all-zero weights; with ``source="exact"`` samples come
    from the rejection sampler.  Gives up after ``abort_multiplier * |S|``
    samples.
    """
    if source not in ("mcmc", "exact"):
        raise ValueError(f"unknown source {source!r}")
    size = enumerate_consistent_cycle(n, domain)
    target = math.ceil(target_fraction * size)
    limit = int(abort_multiplier * size)
    seen = np.zeros(domain.size**n, dtype=bool)
    distinct = drawn = 0
    start = np.zeros((batch, n), dtype=np.int64)
    while drawn < limit:
        k = min(batch, limit - drawn)
        if source == "exact":
            states, _ = exact_cycle_samples(n, domain, k, rng)
        elif engine == "vectorized":
            states = cycle_chains(n, domain, tau, k, rng, start=start[:k])
        elif engine == "generic":
            states = _generic_chains(n, domain, tau, k, rng, "zero", checker)
        else:
            raise ValueError(f"unknown engine {engine!r}")
        keys = encode_states(states, domain)
        fresh = ~seen[keys]
        uniq, first = np.unique(keys[fresh], return_index=True)
        pos = np.sort(np.flatnonzero(fresh)[first])
        if distinct + len(uniq) >= target:
            at = drawn + int(pos[target - distinct - 1]) + 1
            return CoverageReport(n, domain.describe(), tau, source, size, at, target, target, True, at)
        seen[uniq] = True
        distinct += len(uniq)
        drawn += k
    return CoverageReport(n, domain.describe(), tau, source, size, drawn, distinct, target, False, None)


def histogram_bins(domain: WeightDomain, bins: int = 200) -> np.ndarray:
    """Bin edges: one unit bin per value for a discrete domain, ``bins`` equal bins otherwise."""
    if domain.discrete:
        return np.arange(domain.a, domain.b + 2) - 0.5
    return np.linspace(domain.a, domain.b, bins + 1)


def weight_histogram(
    n: int,
    domain: WeightDomain,
    checkpoints: Iterable[int],
    init: str,
    rng: np.random.Generator,
    reps: int = 1,
    engine: str = "vectorized",
    checker: str = "bidijkstra",
    bins: int = 200,
) -> dict[int, np.ndarray]:
    """Edge-weight histogram of the n-cycle chain after each checkpoint step count.

    Counts are pooled over ``reps`` independent chains (``n * reps`` edges per
    histogram); see ``histogram_bins`` for the binning.
    """
    marks = sorted(set(int(c) for c in checkpoints))
    if not marks:
        raise ValueError("no checkpoints")
    steps = marks[-1]
    if engine == "vectorized":
        snaps = cycle_chains(n, domain, steps, reps, rng, init=init, checkpoints=marks)
    elif engine == "generic":
        snaps = _generic_chains(n, domain, steps, reps, rng, init, checker, checkpoints=marks)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    edges = histogram_bins(domain, bins)
    return {c: np.histogram(snaps[c], bins=edges)[0] for c in marks}
