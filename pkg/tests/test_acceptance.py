"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line (visible in
``pytest -v`` output) and then asserts.  Seeds are fixed.
"""
from __future__ import annotations

import itertools
import math
import time
import warnings

import numpy as np
import pytest
from scipy.stats import chi2

from negweights import (
    NEGATIVE_CYCLE,
    WeightDomain,
    build_graph,
    compare_checkers,
    coverage_experiment,
    enumerate_consistent_cycle,
    exact_cycle_samples,
    feasible_potential,
    gen_cycle,
    gen_gnp,
    is_consistent_oracle,
    is_feasible,
    largest_scc_subgraph,
    make_checker,
    make_rng,
    run_chain,
    spfa_distances,
    sssp_general,
    strongly_connected_components,
    weight_histogram,
)
from negweights.cycle import encode_states

TRIT = WeightDomain(-1, 1)
KINDS = ("bf", "dijkstra", "bidijkstra")


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return emit


# 1 -------------------------------------------------------------------------


def test_c01_exact_cycle_counts(report):
    t0 = time.perf_counter()
    got = {n: enumerate_consistent_cycle(n, TRIT) for n in (8, 12, 16)}
    elapsed = time.perf_counter() - t0
    rates = {n: round(c / 3**n, 3) for n, c in got.items()}
    ok = got == {8: 3834, 12: 302615, 16: 24121674} and rates == {8: 0.584, 12: 0.569, 16: 0.560} and elapsed < 1.0
    report(1, ok, f"counts={got} rates={rates} time={elapsed:.3f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def _canonical(n: int, edges: tuple) -> tuple:
    return min(tuple(sorted((p[u], p[v]) for u, v in edges)) for p in itertools.permutations(range(n)))


def _strongly_connected_topologies(max_nodes: int = 5, max_edges: int = 8) -> list:
    """All strongly connected digraphs up to isomorphism with 2..4 nodes, plus 5-node ones, ``m <= max_edges``."""
    found = {}
    for n in range(2, max_nodes + 1):
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
        # 5-node graphs: only up to 7 edges to keep the exhaustive state sweep short
        top = max_edges if n < 5 else 7
        for m in range(n, min(top, len(pairs)) + 1):
            for edges in itertools.combinations(pairs, m):
                g = build_graph(edges, node_count=n)
                if len(strongly_connected_components(g)) != 1:
                    continue
                key = (n, _canonical(n, edges))
                found.setdefault(key, g)
    return list(found.values())


def _sweep(g) -> tuple[int, int]:
    """Check every consistent state and every proposal; returns (states, checks)."""
    m = g.edge_count
    states = list(itertools.product((-1, 0, 1), repeat=m))
    ok = {s: is_consistent_oracle(g, s) for s in states}
    checkers = [make_checker(k, g) for k in KINDS]
    n_states = n_checks = 0
    for s, good in ok.items():
        if not good:
            continue
        n_states += 1
        w = list(s)
        phi = feasible_potential(g, w).tolist()
        for e in range(m):
            for c in (-1, 0, 1):
                new = list(s)
                new[e] = c
                truth = ok[tuple(new)]
                for chk in checkers:
                    v = chk.check(w, phi, e, c)
                    n_checks += 1
                    if v.accepted != truth:
                        raise AssertionError(f"{chk.name} on {g.edges()} w={s} e={e} c={c}: {v.accepted} != {truth}")
                    if truth and chk.uses_potential:
                        phi2 = list(phi)
                        for x, d in v.potential_delta.items():
                            phi2[x] += d
                        if not is_feasible(g, new, phi2):
                            raise AssertionError(f"{chk.name} returned an infeasible potential on {g.edges()} w={s}")
    return n_states, n_checks


@pytest.mark.slow
def test_c02_exhaustive_soundness(report):
    t0 = time.perf_counter()
    topologies = _strongly_connected_topologies()
    states = checks = 0
    error = None
    try:
        for g in topologies:
            s, c = _sweep(g)
            states += s
            checks += c
    except AssertionError as exc:
        error = str(exc)
    elapsed = time.perf_counter() - t0
    sizes = sorted({g.node_count for g in topologies})
    ok = error is None and len(topologies) >= 50
    detail = f"topologies={len(topologies)} nodes={sizes} states={states} verdicts={checks} time={elapsed:.0f}s"
    report(2, ok, detail + ("" if error is None else f" first_error={error}"))
    assert ok


# 3 -------------------------------------------------------------------------


def test_c03_checker_equivalence_at_scale(report):
    g = gen_gnp(200, 5, make_rng(3))
    t0 = time.perf_counter()
    error = None
    try:
        rep = compare_checkers(g, WeightDomain(-10, 10), 10**5, KINDS, "uniform", seed=3, check_feasible=True)
    except AssertionError as exc:  # CheckerDisagreement
        error, rep = str(exc), None
    except RuntimeError as exc:  # ContractViolation
        error, rep = str(exc), None
    elapsed = time.perf_counter() - t0
    ok = error is None and elapsed < 60
    detail = f"n={g.n} m={g.m} proposals=100000 time={elapsed:.1f}s"
    if rep is not None:
        detail += f" accepted={rep.accepted} decreases={rep.decreases}"
    report(3, ok, detail + ("" if error is None else f" error={error}"))
    assert ok


# 4 -------------------------------------------------------------------------


def test_c04_exact_sampler_uniformity(report):
    rng = make_rng(4)
    n = 8
    size = enumerate_consistent_cycle(n, TRIT)
    p = size / 3**n
    samples, draws = exact_cycle_samples(n, TRIT, 10**6, rng)
    rate = len(samples) / draws
    sigma = math.sqrt(p * (1 - p) / draws)
    z = (rate - p) / sigma
    keys = encode_states(samples, TRIT)
    counts = np.bincount(keys, minlength=3**n)
    nonzero = np.count_nonzero(counts)
    valid = counts[counts > 0]
    exp = len(samples) / size
    stat = float(((valid - exp) ** 2 / exp).sum() + (size - nonzero) * exp)
    pval = float(chi2.sf(stat, size - 1))
    ok = abs(z) <= 3 and pval >= 0.01 and nonzero == size
    report(4, ok, f"rate={rate:.5f} (target {p:.5f}, z={z:+.2f}) chi2={stat:.1f} dof={size - 1} p={pval:.3f} states_seen={nonzero}")
    assert ok


# 5 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c05_coverage_transition(report):
    rng = make_rng(5)
    n = 8
    low = [coverage_experiment(n, TRIT, 2 * n, rng) for _ in range(20)]
    high = [coverage_experiment(n, TRIT, 6 * n, rng) for _ in range(20)]
    base = [coverage_experiment(n, TRIT, 0, rng, source="exact") for _ in range(20)]
    failed_low = sum(not r.reached for r in low)
    high_norm = [r.normalized for r in high]
    mean_high = float(np.mean(high_norm)) if all(r.reached for r in high) else math.nan
    mean_base = float(np.mean([r.normalized for r in base]))
    ok = failed_low >= 18 and abs(mean_high - 4.6) <= 0.5
    report(
        5,
        ok,
        f"tau=2n unreached={failed_low}/20; tau=6n mean={mean_high:.3f}|S| "
        f"(min {min(high_norm):.2f}, max {max(high_norm):.2f}); exact baseline mean={mean_base:.3f}|S|",
    )
    assert ok


# 6 -------------------------------------------------------------------------


def test_c06_weight_histogram(report):
    n, reps = 1000, 1000
    dom = WeightDomain(-100, 100)
    hist = weight_histogram(n, dom, [n // 2, 10 * n], "maximum", make_rng(6), reps=reps)
    uniform = n * reps / dom.size
    late = hist[10 * n]
    worst = float(np.max(np.abs(late / uniform - 1)))
    early_max = hist[n // 2][-1] / uniform
    ok = worst <= 0.15 and early_max > 2
    report(6, ok, f"chains={reps} after 10n: max |rel dev|={worst:.3f}; after n/2: max-bin share={early_max:.1f}x uniform")
    assert ok


# 7 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c07_acceptance_rate_vs_degree(report):
    dom = WeightDomain(-100, 100)
    rates = {}
    sizes = {}
    for deg in (10, 50):
        g = largest_scc_subgraph(gen_gnp(2000, deg, make_rng(70 + deg)))
        _, stats = run_chain(g, dom, 10 * g.edge_count, "bidijkstra", "uniform", seed=7)
        rates[deg] = stats.final.acc_rate
        sizes[deg] = (g.n, g.m)
    ok = rates[10] > 0.5 and rates[50] < rates[10]
    report(7, ok, f"steps=10m acc_rate deg10={rates[10]:.4f} deg50={rates[50]:.4f} graphs={sizes}")
    assert ok


# 8 -------------------------------------------------------------------------


@pytest.mark.slow
def test_c08_insertion_ordering(report):
    g = largest_scc_subgraph(gen_gnp(2000, 10, make_rng(8)))
    rep = compare_checkers(g, WeightDomain(-100, 100), 5000, KINDS, "uniform", seed=8, burn_in=5 * g.edge_count)
    rej = {k: rep.mean_insertions(k, False) for k in KINDS}
    acc = {k: rep.mean_insertions(k, True) for k in KINDS}
    ok = (
        rej["bidijkstra"] < rej["dijkstra"] < rej["bf"]
        and acc["dijkstra"] * 10 <= acc["bf"]
        and acc["bidijkstra"] * 10 <= acc["bf"]
    )
    fmt = lambda d: ", ".join(f"{k}={v:.1f}" for k, v in d.items())  # noqa: E731
    report(8, ok, f"rejected: {fmt(rej)}; accepted: {fmt(acc)}; decreases={rep.decreases}")
    assert ok


# 9 -------------------------------------------------------------------------


def _negative_cycle_doctor(g, w, rng):
    """Set every edge of a random directed cycle to -1."""
    # BFS back from an edge's target to its source closes a cycle
    for e in rng.permutation(g.edge_count):
        u, v = g.src[e], g.dst[e]
        parent = {v: None}
        frontier = [v]
        while frontier and u not in parent:
            nxt = []
            for x in frontier:
                for k in g.out_edges(x):
                    y = g.dst[k]
                    if y not in parent:
                        parent[y] = k
                        nxt.append(y)
            frontier = nxt
        if u in parent:
            w = w.copy()
            w[e] = -1
            x = u
            while parent[x] is not None:
                k = parent[x]
                w[k] = -1
                x = g.src[k]
            return w
    raise ValueError("acyclic graph")


def test_c09_sssp_general(report):
    rng = make_rng(9)
    dom = WeightDomain(-10, 10)
    t0 = time.perf_counter()
    equal = detected = 0
    for i in range(200):
        g = gen_gnp(100, 5, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # G(100, 0.05) is rarely strongly connected
            w, _ = run_chain(g, dom, 10 * g.edge_count, "bidijkstra", "uniform", seed=1000 + i, checkpoints=[])
        s = int(rng.integers(g.n))
        ref = spfa_distances(g, w, s)
        got = sssp_general(g, w, s)
        if ref is not NEGATIVE_CYCLE and got is not NEGATIVE_CYCLE and np.array_equal(ref, got):
            equal += 1
        bad = _negative_cycle_doctor(g, w, rng)
        assert not is_consistent_oracle(g, bad)
        if sssp_general(g, bad, s) is NEGATIVE_CYCLE:
            detected += 1
    elapsed = time.perf_counter() - t0
    ok = equal == 200 and detected == 200 and elapsed < 60
    report(9, ok, f"consistent instances equal to SPFA={equal}/200; negative cycles detected={detected}/200; time={elapsed:.1f}s")
    assert ok


# 10 ------------------------------------------------------------------------


def test_c10_transition_symmetry(report):
    g = gen_cycle(3)
    states = [s for s in itertools.product((-1, 0, 1), repeat=3) if sum(s) >= 0]
    index = {s: i for i, s in enumerate(states)}
    trials = 10**6
    rng = make_rng(10)
    counts = {k: np.zeros((len(states), len(states)), dtype=np.int64) for k in KINDS}
    for kind in KINDS:
        chk = make_checker(kind, g)
        for s in states:
            w = list(s)
            phi = feasible_potential(g, w).tolist()
            # target of each of the 9 equally likely (edge, value) proposals under the real checker
            targets = []
            for e in range(3):
                for c in (-1, 0, 1):
                    if chk.check(w, phi, e, c).accepted:
                        new = list(s)
                        new[e] = c
                        targets.append(index[tuple(new)])
                    else:
                        targets.append(index[s])
            hits = rng.multinomial(trials, [1 / 9] * 9)
            np.add.at(counts[kind][index[s]], targets, hits)
    worst = 0.0
    ok = len(states) == 17
    for kind in KINDS:
        p = counts[kind] / trials
        se = np.sqrt((p * (1 - p) + p.T * (1 - p.T)) / trials)
        diff = np.abs(p - p.T)
        off = ~np.eye(len(states), dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
        worst = max(worst, float(z[off].max()))
        ok &= bool(np.all(z[off] <= 3))
    report(10, ok, f"states={len(states)} trials/state={trials} checkers={','.join(KINDS)} max |dP|/SE={worst:.2f}")
    assert ok
