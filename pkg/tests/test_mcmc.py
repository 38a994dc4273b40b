import numpy as np
import pytest

from negweights import (
    ChainState,
    WeightDomain,
    build_graph,
    compare_checkers,
    gen_cycle,
    gen_gnp,
    initial_weights,
    is_consistent_oracle,
    is_feasible,
    largest_scc_subgraph,
    make_checker,
    make_rng,
    mcmc_step,
    run_chain,
    run_ensemble,
)
from negweights.mcmc import STATS_COLUMNS, CheckerDisagreement, ProposalStream, checkpoint_schedule

D = WeightDomain(-1, 1)


def test_proposal_stream_blocks_are_transparent():
    a = ProposalStream(7, D, make_rng(3), block=5)
    b = ProposalStream(7, D, make_rng(3), block=5)
    first = [a.next() for _ in range(12)]
    e, c = b.take(12)
    assert first == list(zip(e, c))
    assert all(0 <= x < 7 for x, _ in first) and all(y in D for _, y in first)


def test_same_proposal_as_current_weight_changes_nothing():
    g = gen_cycle(3)
    state = ChainState(g, D, [0, 0, 0], make_rng(0))
    chk = make_checker("bidijkstra", g)
    for _ in range(200):
        before = list(state.w)
        acc, st = mcmc_step(state, chk)
        if st.new_weight == st.old_weight:
            assert acc and state.w == before
    assert state.step == 200


def test_acyclic_graph_accepts_everything():
    g = build_graph([(0, 1), (1, 2), (0, 2), (2, 3)])
    state = ChainState.initial(g, WeightDomain(-5, 5), "zero", 1)
    chk = make_checker("dijkstra", g)
    assert all(mcmc_step(state, chk)[0] for _ in range(500))


def test_three_cycle_never_leaves_consistent_set():
    g = gen_cycle(3)
    state = ChainState.initial(g, D, "zero", 4)
    chk = make_checker("bidijkstra", g)
    for _ in range(20_000):
        mcmc_step(state, chk)
        assert sum(state.w) >= 0
        assert is_feasible(g, state.w, state.phi)


def test_chain_state_with_negative_start():
    g = gen_cycle(3)
    state = ChainState(g, D, [-1, 1, 0], make_rng(0))
    assert is_feasible(g, state.w, state.phi)
    with pytest.raises(ValueError):
        ChainState(g, D, [0, 0], make_rng(0))


def test_run_chain_deterministic_and_audited():
    g = largest_scc_subgraph(gen_gnp(80, 4, np.random.default_rng(0)))
    w1, s1 = run_chain(g, WeightDomain(-10, 10), 3000, "bidijkstra", "uniform", seed=5, audit=True)
    w2, s2 = run_chain(g, WeightDomain(-10, 10), 3000, "bidijkstra", "uniform", seed=5)
    assert np.array_equal(w1, w2)
    assert [r.accepted for r in s1.records] == [r.accepted for r in s2.records]
    assert is_consistent_oracle(g, w1)


def test_checkers_produce_same_weights():
    g = largest_scc_subgraph(gen_gnp(80, 4, np.random.default_rng(0)))
    outs = [run_chain(g, WeightDomain(-10, 10), 2000, k, "uniform", seed=2) for k in ("bf", "dijkstra", "bidijkstra")]
    assert all(np.array_equal(outs[0][0], o[0]) for o in outs[1:])
    acc = {o[1].final.accepted for o in outs}
    assert len(acc) == 1
    ins = [o[1].final.mean_ins_rejected for o in outs]
    assert max(ins[1], ins[2]) < ins[0]


def test_real_domain_chain():
    g = largest_scc_subgraph(gen_gnp(60, 4, np.random.default_rng(1)))
    w, stats = run_chain(g, WeightDomain(-100, 100, False), 3000, seed=3)
    assert w.dtype == np.float64 and is_consistent_oracle(g, w)
    assert (w < 0).any()
    assert 0 < stats.final.acc_rate <= 1


def test_default_steps_and_checkpoints():
    g = gen_cycle(5)
    _, stats = run_chain(g, D, seed=0)
    assert stats.final.steps == 500
    assert stats.column("steps").tolist() == checkpoint_schedule(500)
    _, stats = run_chain(g, D, 50, checkpoints=[10, 20, 999], seed=0)
    assert stats.column("steps").tolist() == [10, 20, 50]


def test_checkpoint_schedule():
    assert checkpoint_schedule(10) == [1, 2, 4, 8, 10]
    assert checkpoint_schedule(8) == [1, 2, 4, 8]


def test_stats_values_and_csv(tmp_path):
    g = gen_cycle(8)
    w, stats = run_chain(g, D, 48, "bf", "uniform", seed=7)
    f = stats.final
    assert f.steps == 48
    assert f.acc_rate == pytest.approx(f.accepted / 48)
    assert f.mean_weight == pytest.approx(w.mean())
    assert f.frac_negative == pytest.approx((w < 0).mean())
    path = tmp_path / "s.csv"
    stats.to_csv(path, wall_clock=False)
    lines = path.read_text().splitlines()
    body = [x for x in lines if not x.startswith("#")]
    assert body[0] == ",".join(STATS_COLUMNS)
    assert all(row.endswith(",") for row in body[1:])
    assert any(x == "# seed=7" for x in lines)


def test_disconnected_graph_warns():
    g = build_graph([(0, 1), (1, 0), (1, 2)])
    with pytest.warns(UserWarning, match="strongly connected"):
        run_chain(g, D, 10)


def test_init_error_propagates():
    with pytest.raises(ValueError):
        run_chain(gen_cycle(3), WeightDomain(-3, -1), 10)


def test_ensemble_matches_sequential(monkeypatch):
    g = largest_scc_subgraph(gen_gnp(50, 3, np.random.default_rng(0)))
    dom = WeightDomain(-5, 5)
    serial = run_ensemble(g, dom, 500, "bidijkstra", "uniform", [1, 2], parallelism=1)
    parallel = run_ensemble(g, dom, 500, "bidijkstra", "uniform", [1, 2], parallelism=2)
    for (a, _), (b, _) in zip(serial, parallel):
        assert np.array_equal(a, b)
    single = run_ensemble(g, dom, 500, "bidijkstra", "uniform", [1])
    assert np.array_equal(single[0][0], run_chain(g, dom, 500, "bidijkstra", "uniform", 1)[0])
    monkeypatch.setenv("NEGWEIGHTS_THREADS", "2")
    env = run_ensemble(g, dom, 500, "bidijkstra", "uniform", [1, 2])
    assert np.array_equal(env[1][0], serial[1][0])
    with pytest.raises(ValueError):
        run_ensemble(g, dom, 10, "bf", "zero", [1, 1])


def test_compare_checkers_report():
    g = gen_gnp(100, 5, np.random.default_rng(3))
    rep = compare_checkers(g, WeightDomain(-10, 10), 3000, burn_in=1000, check_feasible=True)
    assert rep.decreases > rep.accepted_decreases > 0
    assert rep.mean_insertions("bidijkstra", False) < rep.mean_insertions("bf", False)


def test_compare_checkers_detects_disagreement(monkeypatch):
    g = gen_cycle(4)
    from negweights import checkers

    class Liar(checkers.BellmanFordChecker):
        def check(self, w, phi, edge, new_weight):
            v = super().check(w, phi, edge, new_weight)
            return checkers.Verdict(not v.accepted) if new_weight < w[edge] else v

    monkeypatch.setitem(checkers.CHECKERS, "liar", Liar)
    with pytest.raises(CheckerDisagreement):
        compare_checkers(g, D, 500, kinds=("bf", "liar"))


def test_initial_weights_are_consistent_for_all_strategies():
    g = gen_gnp(40, 4, np.random.default_rng(0))
    for s in ("maximum", "zero", "uniform"):
        assert is_consistent_oracle(g, initial_weights(g, WeightDomain(-9, 9), s, make_rng(0)))


def test_compare_checkers_catches_bad_potential(monkeypatch):
    from negweights import ContractViolation, checkers

    class Sloppy(checkers.DijkstraChecker):
        name = "sloppy"

        def check(self, w, phi, edge, new_weight):
            v = super().check(w, phi, edge, new_weight)
            # drop the repair: the broken edge stays broken
            return checkers.Verdict(v.accepted, v.insertions) if v.accepted else v

    monkeypatch.setitem(checkers.CHECKERS, "sloppy", Sloppy)
    g = gen_cycle(5)
    with pytest.raises(ContractViolation):
        compare_checkers(g, WeightDomain(-3, 3), 2000, kinds=("bf", "sloppy"), check_feasible=True)
