"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 capacity or sampling-cap exit,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import instances
from .diffusion import CapacityError, exact_spread
from .experiment import (METHODS, ConfigError, ExperimentConfig, evaluate_solution,
                         format_csv, load_graph, resolve_seeds, run_experiment,
                         sweep)
from .graph import (GraphFormatError, generate_candidates, load_candidates,
                    write_candidates)

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_IO = 0, 2, 3, 4


def _problem_args(p, candidates=True):
    p.add_argument("--graph", required=True)
    p.add_argument("--seeds", help="seed file, one node id per line")
    p.add_argument("--seed-strategy", default=None,
                   help="file | top_outdeg:COUNT | random:COUNT")
    if candidates:
        p.add_argument("--candidates", help="candidate file 'u v p'")
        p.add_argument("--candidate-mode", default="all", choices=["all", "sample"])
        p.add_argument("--candidate-limit", type=int)
        p.add_argument("--candidate-fallback", type=float,
                       help="probability for nodes with no incident edges "
                            "(default: global mean edge probability)")
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--probabilities", default="auto", choices=["auto", "wic", "file"])
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")


def _solver_args(p):
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.001)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--r", type=int, default=10000)
    p.add_argument("--eval-eps", type=float, default=0.05)
    p.add_argument("--eval-delta", type=float, default=0.01)
    p.add_argument("--cap", type=int, default=50_000_000)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte-identical reports)")


def build_parser():
    parser = argparse.ArgumentParser(prog="ima", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="select edges with AIS")
    _problem_args(p)
    _solver_args(p)

    p = sub.add_parser("baseline", help="select edges with a comparison method")
    _problem_args(p)
    _solver_args(p)
    p.add_argument("--method", required=True, choices=METHODS[1:])

    p = sub.add_parser("sweep", help="k-sweep over one or more methods (CSV)")
    _problem_args(p)
    _solver_args(p)
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--ks", default="1,2,3,4,5")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--aggregate", choices=["mean", "median"], default="mean")

    p = sub.add_parser("eval", help="(eps, delta)-estimate of the spread of S with added edges")
    _problem_args(p, candidates=False)
    p.add_argument("--added", help="edges to add, 'u v p' per line")
    p.add_argument("--eval-eps", type=float, default=0.05)
    p.add_argument("--eval-delta", type=float, default=0.01)
    p.add_argument("--out")

    p = sub.add_parser("oracle", help="exact spread by world enumeration (small graphs)")
    _problem_args(p, candidates=False)
    p.add_argument("--added", help="edges to add, 'u v p' per line")

    p = sub.add_parser("gen-candidates", help="write a candidate edge file")
    _problem_args(p, candidates=False)
    p.add_argument("--mode", default="all", choices=["all", "sample"])
    p.add_argument("--limit", type=int)
    p.add_argument("--fallback", type=float)
    p.add_argument("--out")

    p = sub.add_parser("gen-instance", help="write a generated test instance")
    p.add_argument("--kind", required=True, choices=sorted(instances.KINDS))
    p.add_argument("--n", type=int)
    p.add_argument("--p-edge", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _config_from(args, method):
    strategy = args.seed_strategy or ("file" if args.seeds else "top_outdeg:1")
    return ExperimentConfig(
        graph=args.graph, seeds=args.seeds, seed_strategy=strategy,
        candidates=args.candidates, candidate_mode=args.candidate_mode,
        candidate_limit=args.candidate_limit,
        candidate_fallback=args.candidate_fallback, directed=not args.undirected,
        probabilities=args.probabilities, k=args.k, eps=args.eps, delta=args.delta,
        beta=args.beta, method=method, r=args.r, eval_eps=args.eval_eps,
        eval_delta=args.eval_delta, seed=args.seed, cap=args.cap, out=args.out,
        format=args.format, timings=args.timings)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _graph_and_seeds(args):
    graph = load_graph(args.graph, not args.undirected, args.probabilities)
    strategy = args.seed_strategy or ("file" if args.seeds else "top_outdeg:1")
    return graph, resolve_seeds(graph, strategy, args.seeds, args.seed)


def _added(args, graph, seeds):
    if not getattr(args, "added", None):
        return []
    return load_candidates(args.added, graph, seeds)


def _run(args):
    cmd = args.command
    if cmd in ("solve", "baseline"):
        config = _config_from(args, "AIS" if cmd == "solve" else args.method)
        report = run_experiment(config)
        if config.format == "csv":
            _emit(format_csv([report.csv_row()]), config.out)
        else:
            _emit(report.to_json(), config.out)
        if report.flags["cap_hit"] or report.flags["eval_cap_hit"]:
            return EXIT_CAPACITY
        return EXIT_OK

    if cmd == "sweep":
        config = _config_from(args, (args.method or ["AIS"])[0])
        config.validate()
        ks = [int(x) for x in args.ks.split(",") if x.strip()]
        rows = sweep(config, ks, args.method or ["AIS"], args.repeats, args.aggregate)
        if args.format == "json":
            _emit(json.dumps({"schema": 1, "rows": rows}, indent=2, sort_keys=True) + "\n",
                  args.out)
        else:
            _emit(format_csv(rows), args.out)
        return EXIT_OK

    if cmd == "eval":
        graph, seeds = _graph_and_seeds(args)
        est = evaluate_solution(graph, _added(args, graph, seeds), seeds,
                                args.eval_eps, args.eval_delta, args.seed)
        doc = {"schema": 1, "value": est.value, "half_width": est.half_width,
               "theta": est.sample_count, "guaranteed": est.guaranteed}
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK if est.guaranteed else EXIT_CAPACITY

    if cmd == "oracle":
        graph, seeds = _graph_and_seeds(args)
        value = exact_spread(graph, _added(args, graph, seeds), seeds)
        print(f"{value:.12g}")
        return EXIT_OK

    if cmd == "gen-candidates":
        graph, seeds = _graph_and_seeds(args)
        cands = generate_candidates(graph, seeds, args.mode, args.limit, args.seed,
                                    args.fallback)
        if args.out:
            with open(args.out, "w") as fh:
                write_candidates(graph, cands, fh)
        else:
            write_candidates(graph, cands, sys.stdout)
        return EXIT_OK

    if cmd == "gen-instance":
        params = {}
        if args.n is not None:
            params["n"] = args.n
        if args.p_edge is not None:
            params["p_edge"] = args.p_edge
        inst = instances.gen_instance(args.kind, params, args.seed)
        for path in inst.write(args.out).values():
            print(path)
        return EXIT_OK
    raise AssertionError(cmd)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, GraphFormatError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
