"""Sample edge weights, including negative ones, uniformly among assignments without negative cycles."""
from .checkers import (
    BellmanFordChecker,
    BiDijkstraChecker,
    DijkstraChecker,
    Proposal,
    Verdict,
    check_bellman_ford,
    check_bidijkstra,
    check_dijkstra,
    make_checker,
)
from .cycle import (
    CoverageReport,
    coverage_experiment,
    cycle_chains,
    decode_states,
    encode_states,
    enumerate_consistent_cycle,
    exact_cycle_sampler,
    exact_cycle_samples,
    weight_histogram,
)
from .graph import (
    Graph,
    build_graph,
    gen_cycle,
    gen_doubly_linked_path,
    gen_dsf,
    gen_gnp,
    largest_scc_subgraph,
    load_edge_list,
    save_edge_list,
    strongly_connected_components,
)
from .mcmc import ChainState, RunStats, compare_checkers, make_rng, mcmc_step, run_chain, run_ensemble
from .potential import (
    ContractViolation,
    is_feasible,
    potential_weight,
    repair_backward,
    repair_forward,
)
from .sssp import NEGATIVE_CYCLE, NegativeCycleFound, spfa_distances, sssp_general
from .weights import (
    WeightDomain,
    feasible_potential,
    initial_weights,
    is_consistent_oracle,
    load_weights,
    sample_weight,
    save_weights,
)

__version__ = "0.1.0"
