"""Command-line front end.

Subcommands: generate, sample, compare, coverage, hist, sssp.  Every output
file starts with ``#`` lines recording the parameters and seed needed to
reproduce it.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cycle import CoverageReport, coverage_experiment, histogram_bins, weight_histogram
from .graph import (
    Graph,
    gen_cycle,
    gen_doubly_linked_path,
    gen_dsf,
    gen_gnp,
    largest_scc_subgraph,
    load_edge_list,
    save_edge_list,
    strongly_connected_components,
)
from .mcmc import RNG_NAME, compare_checkers, make_rng, run_chain, run_ensemble
from .sssp import NEGATIVE_CYCLE, sssp_general
from .weights import WeightDomain, load_weights, save_weights

_MODELS = {
    "gnp": {"n": int, "deg": float},
    "dsf": {"n": int, "beta": float},
    "cycle": {"n": int},
    "dpath": {"k": int},
}


class UsageError(ValueError):
    pass


def parse_graph_spec(spec: str) -> tuple[str, dict, bool]:
    """``"gnp:n=1000,deg=10,scc"`` -> ``("gnp", {"n": 1000, "deg": 10.0}, True)``."""
    model, sep, rest = spec.partition(":")
    if model not in _MODELS or not sep:
        raise UsageError(f"unknown graph model in {spec!r}; expected one of {', '.join(_MODELS)}")
    fields = _MODELS[model]
    params = {}
    scc = False
    for item in filter(None, rest.split(",")):
        if item == "scc":
            scc = True
            continue
        key, eq, val = item.partition("=")
        if not eq or key not in fields:
            raise UsageError(f"bad parameter {item!r} for model {model!r}")
        try:
            params[key] = fields[key](val)
        except ValueError:
            raise UsageError(f"bad value for {key!r} in {spec!r}") from None
    missing = set(fields) - set(params)
    if missing:
        raise UsageError(f"model {model!r} needs {', '.join(sorted(missing))}")
    return model, params, scc


def generate_graph(spec: str, seed: int) -> Graph:
    model, p, scc = parse_graph_spec(spec)
    rng = make_rng(seed)
    if model == "gnp":
        g = gen_gnp(p["n"], p["deg"], rng)
    elif model == "dsf":
        g = gen_dsf(p["n"], p["beta"], rng)
    elif model == "cycle":
        g = gen_cycle(p["n"])
    else:
        g = gen_doubly_linked_path(p["k"])
    return largest_scc_subgraph(g) if scc else g


def _graph_arg(text: str, seed: int) -> Graph:
    if os.path.exists(text):
        return load_edge_list(text)
    try:
        return generate_graph(text, seed)
    except UsageError:
        raise UsageError(f"{text!r} is neither a readable file nor a graph spec") from None


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _header(args: argparse.Namespace, **extra) -> list[str]:
    items = {"negweights": __version__, "command": args.command}
    for k, v in sorted(vars(args).items()):
        if k not in ("command", "func") and v is not None:
            items[k] = ",".join(map(str, v)) if isinstance(v, list) else v
    items.update(extra)
    return [f"{k}={v}" for k, v in items.items()]


def _write_header(fh, lines):
    for line in lines:
        fh.write(f"# {line}\n")


def cmd_generate(args) -> int:
    g = generate_graph(args.spec, args.seed)
    save_edge_list(g, args.out, header=_header(args, rng=RNG_NAME, n=g.node_count, m=g.edge_count))
    print(f"n={g.node_count} m={g.edge_count} sccs={len(strongly_connected_components(g))}")
    return 0


def _suffixed(path: str, seed: int) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.seed{seed}{p.suffix}"))


def cmd_sample(args) -> int:
    g = _graph_arg(args.graph, args.graph_seed if args.graph_seed is not None else args.seed)
    domain = WeightDomain.parse(args.domain, args.mode)
    steps = args.steps if args.steps is not None else 100 * g.edge_count
    seeds = [args.seed + i for i in range(args.ensemble)]
    if len(seeds) == 1:
        results = [run_chain(g, domain, steps, args.checker, args.init, args.seed, audit=args.audit)]
    else:
        results = run_ensemble(g, domain, steps, args.checker, args.init, seeds, args.threads)
    for seed, (w, stats) in zip(seeds, results):
        head = _header(args, rng=RNG_NAME, run_seed=seed, resolved_steps=steps, n=g.node_count, m=g.edge_count)
        wpath = args.weights_out if len(seeds) == 1 else _suffixed(args.weights_out, seed)
        save_weights(g, w, wpath, header=head)
        if args.stats_out:
            spath = args.stats_out if len(seeds) == 1 else _suffixed(args.stats_out, seed)
            stats.header = dict(line.split("=", 1) for line in head)
            stats.to_csv(spath, wall_clock=not args.no_timing)
        f = stats.final
        print(f"seed={seed} steps={f.steps} acc_rate={f.acc_rate:.4f} mean_weight={f.mean_weight:.4f} frac_negative={f.frac_negative:.4f}")
    return 0


def cmd_compare(args) -> int:
    g = _graph_arg(args.graph, args.graph_seed if args.graph_seed is not None else args.seed)
    domain = WeightDomain.parse(args.domain, args.mode)
    kinds = args.checkers.split(",")
    rep = compare_checkers(g, domain, args.steps, kinds, args.init, args.seed, burn_in=args.burn_in, check_feasible=args.check_feasible)
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        _write_header(out, _header(args, rng=RNG_NAME, decreases=rep.decreases, accepted_decreases=rep.accepted_decreases))
        out.write("checker,mean_ins_accepted,mean_ins_rejected\n")
        for k in kinds:
            out.write(f"{k},{rep.mean_insertions(k, True)!r},{rep.mean_insertions(k, False)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_coverage(args) -> int:
    domain = WeightDomain.parse(args.domain, "int")
    rng = make_rng(args.seed)
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        _write_header(out, _header(args, rng=RNG_NAME))
        out.write("rep," + ",".join(CoverageReport.FIELDS) + "\n")
        cells = [("exact", 0)] if args.baseline else []
        cells += [("mcmc", t) for t in args.tau]
        for source, tau in cells:
            for rep in range(args.reps):
                r = coverage_experiment(args.n, domain, tau, rng, args.abort_multiplier, source=source)
                out.write(f"{rep}," + ",".join(str(x) for x in r.row()) + "\n")
                out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_hist(args) -> int:
    domain = WeightDomain.parse(args.domain, args.mode)
    rng = make_rng(args.seed)
    hist = weight_histogram(args.n, domain, args.checkpoints, args.init, rng, reps=args.reps, bins=args.bins)
    edges = histogram_bins(domain, args.bins)
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        _write_header(out, _header(args, rng=RNG_NAME))
        out.write("steps,bin_low,bin_high,count\n")
        for steps, counts in hist.items():
            for lo, hi, c in zip(edges[:-1].tolist(), edges[1:].tolist(), counts.tolist()):
                out.write(f"{steps},{lo!r},{hi!r},{c}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _fmt_dist(x: float, integral: bool) -> str:
    if math.isinf(x):
        return "inf"
    return str(int(x)) if integral else repr(float(x))


def cmd_sssp(args) -> int:
    g = load_edge_list(args.graph)
    w = load_weights(g, args.weights)
    ids = np.arange(g.node_count) if g.labels is None else g.labels
    matches = np.flatnonzero(ids == args.source)
    if len(matches) == 0:
        raise UsageError(f"source node {args.source} not in graph")
    res = sssp_general(g, w, int(matches[0]))
    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        _write_header(out, _header(args))
        if res is NEGATIVE_CYCLE:
            out.write("NEGATIVE_CYCLE\n")
        else:
            integral = np.issubdtype(w.dtype, np.integer)
            out.write("node,distance\n")
            for x, d in zip(ids.tolist(), res.tolist()):
                out.write(f"{x},{_fmt_dist(d, integral)}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="negweights", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random or structured graph as an edge list")
    p.add_argument("spec", help="gnp:n=<int>,deg=<real> | dsf:n=<int>,beta=<real> | cycle:n=<int> | dpath:k=<int>, optional ,scc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    def chain_args(p):
        p.add_argument("--graph", required=True, help="edge-list file or graph spec")
        p.add_argument("--graph-seed", type=int, help="seed for a generated graph (default: --seed)")
        p.add_argument("--domain", default="-100:100")
        p.add_argument("--mode", choices=("int", "real"), default="real")
        p.add_argument("--init", choices=("zero", "max", "maximum", "uniform"), default="uniform")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sample", help="run the sampler and write final weights and stats")
    chain_args(p)
    p.add_argument("--steps", type=int, help="number of proposals (default 100*m)")
    p.add_argument("--checker", choices=("bf", "dijkstra", "bidijkstra"), default="bidijkstra")
    p.add_argument("--weights-out", required=True)
    p.add_argument("--stats-out")
    p.add_argument("--ensemble", type=int, default=1, help="run seeds seed..seed+K-1")
    p.add_argument("--threads", type=int, help="worker processes for --ensemble (default $NEGWEIGHTS_THREADS or 1)")
    p.add_argument("--audit", action="store_true", help="verify consistency at every checkpoint")
    p.add_argument("--no-timing", action="store_true", help="leave the ns_per_step column empty")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("compare", help="run several checkers on one proposal stream and report queue insertions")
    chain_args(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=0)
    p.add_argument("--checkers", default="bf,dijkstra,bidijkstra")
    p.add_argument("--check-feasible", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("coverage", help="runs-until-coverage on the n-cycle")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--domain", default="-1:1")
    p.add_argument("--tau", type=_int_list, required=True, help="comma-separated step counts")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--abort-multiplier", type=float, default=10)
    p.add_argument("--baseline", action="store_true", help="also run the exact rejection sampler")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("hist", help="edge-weight histograms of the n-cycle chain")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--domain", default="-100:100")
    p.add_argument("--mode", choices=("int", "real"), default="int")
    p.add_argument("--checkpoints", type=_int_list, required=True)
    p.add_argument("--init", choices=("zero", "max", "maximum", "uniform"), default="maximum")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--bins", type=int, default=200, help="bins for a real domain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("sssp", help="shortest paths for weights that may be negative")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sssp)
    return ap


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "-100:100" as an option; bind it to its flag instead
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


_VALUE_FLAGS = {"--domain"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError) as exc:
        print(f"negweights: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
