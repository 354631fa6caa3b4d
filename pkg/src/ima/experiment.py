"""Experiment driver: ingestion, method dispatch, solution evaluation and
report emission."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field, replace

from ._rng import derive_key
from .baselines import BaselineKind, run_baseline
from .diffusion import SpreadEstimate
from .graph import (SeedSet, assign_wic_probabilities, generate_candidates,
                    load_candidates, load_edge_list, load_seeds, random_seeds,
                    top_outdegree_seeds)
from .rrsets import DEFAULT_CAP, RRCollection, sample_until_coverage
from .solver import SolverConfig, coverage_threshold, select_edges

SCHEMA_VERSION = 1
METHODS = ("AIS",) + tuple(k.value for k in BaselineKind)

_EVAL_STREAM = 0xE7A1
_BASELINE_STREAM = 0xBA5E

CSV_FIELDS = ["method", "k", "eps", "delta", "beta", "seed", "repeat",
              "spread_before", "half_width_before", "spread_after",
              "half_width_after", "theta_solve", "theta_eval", "n_edges"]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _binomial_half_width(n, hits, theta):
    q = hits / theta
    return 1.96 * n * math.sqrt(max(q * (1.0 - q), 0.0) / theta)


def collection_estimate(coll: RRCollection) -> SpreadEstimate:
    """``n·Λ/θ`` with a 95% binomial half-width."""
    return SpreadEstimate(coll.spread(), coll.theta,
                          _binomial_half_width(coll.n, coll.coverage_count, coll.theta),
                          not coll.cap_hit)


def evaluate_solution(graph, added, seeds, eps_eval=0.05, delta_eval=0.01, seed=0,
                      cap=DEFAULT_CAP) -> SpreadEstimate:
    """Estimate ``σ(A, S)`` on the augmented graph with untruncated RR sets
    sampled until the coverage stopping rule for ``(eps_eval, delta_eval)``.

    ``guaranteed`` is False when sampling stopped at ``cap``.
    """
    if not (0 < eps_eval < 1 and 0 < delta_eval < 1):
        raise ConfigError("evaluation eps and delta must lie in (0, 1)")
    g = graph.augmented(added)
    threshold = coverage_threshold(eps_eval, delta_eval)
    coll = sample_until_coverage(g, seeds, threshold, cap=cap, seed=seed,
                                 truncate=False)
    return collection_estimate(coll)


@dataclass
class ExperimentConfig:
    graph: str
    seeds: str | None = None
    seed_strategy: str = "file"
    candidates: str | None = None
    candidate_mode: str = "all"
    candidate_limit: int | None = None
    candidate_fallback: float | None = None
    directed: bool = True
    probabilities: str = "auto"
    k: int = 50
    eps: float = 0.5
    delta: float = 0.001
    beta: float = 1.0
    method: str = "AIS"
    r: int = 10000
    eval_eps: float = 0.05
    eval_delta: float = 0.01
    seed: int = 0
    cap: int = DEFAULT_CAP
    out: str | None = None
    format: str = "json"
    timings: bool = False

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        for name in ("eps", "delta", "eval_eps", "eval_delta"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.beta < 1:
            raise ConfigError("beta must be >= 1")
        if self.r < 1:
            raise ConfigError("r must be >= 1")
        if self.probabilities not in ("auto", "wic", "file"):
            raise ConfigError(f"unknown probability mode {self.probabilities!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        return self


@dataclass
class RunReport:
    config: dict
    method: str
    n: int
    m: int
    seeds: list
    edges: list
    spread_before: dict
    spread_after: dict
    theta_solve: int
    theta_eval: int
    flags: dict
    timings_ms: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"schema": SCHEMA_VERSION}
        d.update(asdict(self))
        if not self.timings_ms:
            d.pop("timings_ms")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_row(self, repeat=0):
        c = self.config
        return {
            "method": self.method, "k": c["k"], "eps": c["eps"], "delta": c["delta"],
            "beta": c["beta"], "seed": c["seed"], "repeat": repeat,
            "spread_before": self.spread_before["value"],
            "half_width_before": self.spread_before["half_width"],
            "spread_after": self.spread_after["value"],
            "half_width_after": self.spread_after["half_width"],
            "theta_solve": self.theta_solve, "theta_eval": self.theta_eval,
            "n_edges": len(self.edges),
        }


def _estimate_dict(est: SpreadEstimate):
    return {"value": est.value, "half_width": est.half_width,
            "theta": est.sample_count, "guaranteed": est.guaranteed}


def load_graph(path, directed=True, probabilities="auto"):
    """Read an edge list; ``auto`` assigns weighted-cascade probabilities when
    the file carries none."""
    graph = load_edge_list(path, directed=directed)
    if probabilities == "wic" or (
            probabilities == "auto" and graph.m and not graph.out_p.any()):
        graph = assign_wic_probabilities(graph)
    return graph


def resolve_seeds(graph, strategy="file", path=None, seed=0) -> SeedSet:
    """Seeds from a file, or ``top_outdeg:COUNT`` / ``random:COUNT``."""
    if strategy == "file":
        if not path:
            raise ConfigError("seed strategy 'file' needs a seeds path")
        seeds = load_seeds(path, graph)
    elif strategy.startswith("top_outdeg"):
        seeds = top_outdegree_seeds(graph, _count_suffix(strategy))
    elif strategy.startswith("random"):
        seeds = random_seeds(graph, _count_suffix(strategy), seed)
    else:
        raise ConfigError(f"unknown seed strategy {strategy!r}")
    if len(seeds) == 0:
        raise ConfigError("seed set is empty")
    return seeds


def _count_suffix(strategy):
    try:
        return int(strategy.split(":", 1)[1])
    except (IndexError, ValueError):
        raise ConfigError(f"seed strategy {strategy!r} needs ':count'") from None


def load_problem(config: ExperimentConfig):
    """Graph, seeds and candidates described by ``config``."""
    graph = load_graph(config.graph, config.directed, config.probabilities)
    seeds = resolve_seeds(graph, config.seed_strategy, config.seeds, config.seed)
    if config.candidates:
        cands = load_candidates(config.candidates, graph, seeds)
    else:
        if config.candidate_mode not in ("all", "sample"):
            raise ConfigError(f"unknown candidate mode {config.candidate_mode!r}")
        cands = generate_candidates(graph, seeds, config.candidate_mode,
                                    config.candidate_limit, config.seed,
                                    config.candidate_fallback)
    if not cands:
        raise ConfigError("candidate set is empty")
    return graph, seeds, cands


def solve_collection(graph, seeds, n_candidates, solver_config):
    """The truncated RR collection the solver (and RR-based baselines) use."""
    threshold = coverage_threshold(solver_config.lam,
                                   solver_config.scaled_delta(n_candidates),
                                   solver_config.beta)
    return sample_until_coverage(graph, seeds, threshold, cap=solver_config.cap,
                                 seed=solver_config.seed, truncate=True)


def run_method(method, graph, seeds, cands, solver_config, r=10000):
    """Dispatch ``method``; returns ``(edges, theta_solve, flags, timings)``."""
    timings = {}
    flags = {"cap_hit": False, "degenerate": False, "short": False,
             "guarantee_waived": solver_config.beta > 1}
    k = solver_config.k
    theta = 0
    needs_rr = method in ("AIS", "SINF", "AIS_NO_PROB", "AIS_NO_UPDATE")
    coll = None
    if needs_rr:
        t0 = time.perf_counter()
        coll = solve_collection(graph, seeds, len(cands), solver_config)
        timings["sampling"] = (time.perf_counter() - t0) * 1e3
        theta = coll.theta
        flags["cap_hit"] = coll.cap_hit
    t0 = time.perf_counter()
    if method == "AIS":
        edges, _, sel = select_edges(coll, cands, k, solver_config.seed)
        flags["degenerate"] = sel["degenerate"]
    else:
        bseed = int(derive_key(solver_config.seed, _BASELINE_STREAM))
        edges = run_baseline(method, graph, seeds, cands, k, collection=coll,
                             r=r, seed=bseed)
    timings["selection"] = (time.perf_counter() - t0) * 1e3
    flags["short"] = len(edges) < k
    if coll is not None:
        coll.audit()
    return edges, theta, flags, timings


def run_experiment(config: ExperimentConfig, problem=None) -> RunReport:
    """Load, select, evaluate before and after. ``problem`` may supply an
    already-loaded ``(graph, seeds, candidates)`` triple."""
    config.validate()
    t0 = time.perf_counter()
    graph, seeds, cands = problem if problem is not None else load_problem(config)
    t_load = (time.perf_counter() - t0) * 1e3
    solver_config = SolverConfig(config.eps, config.delta, config.k, config.beta,
                                 config.seed, config.cap)
    edges, theta, flags, timings = run_method(config.method, graph, seeds, cands,
                                              solver_config, config.r)
    eval_seed = int(derive_key(config.seed, _EVAL_STREAM))
    t0 = time.perf_counter()
    before = evaluate_solution(graph, [], seeds, config.eval_eps, config.eval_delta,
                               eval_seed, config.cap)
    after = evaluate_solution(graph, edges, seeds, config.eval_eps,
                              config.eval_delta, eval_seed, config.cap)
    timings["evaluation"] = (time.perf_counter() - t0) * 1e3
    timings["load"] = t_load
    flags["eval_cap_hit"] = not (before.guaranteed and after.guaranteed)
    lab = graph.labels
    echo = {k: v for k, v in asdict(config).items() if k not in ("out", "timings")}
    return RunReport(
        config=echo, method=config.method, n=graph.n, m=graph.m,
        seeds=[int(lab[s]) for s in seeds],
        edges=[[int(lab[e.u]), int(lab[e.v]), float(e.p)] for e in edges],
        spread_before=_estimate_dict(before), spread_after=_estimate_dict(after),
        theta_solve=theta, theta_eval=after.sample_count, flags=flags,
        timings_ms={k: round(v, 3) for k, v in timings.items()} if config.timings else {},
    )


def format_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def sweep(config: ExperimentConfig, ks, methods=None, repeats=1, aggregate="mean"):
    """Run every method for every ``k``, ``repeats`` times each, and return
    aggregated CSV rows (one per method and k)."""
    if aggregate not in ("mean", "median"):
        raise ConfigError("aggregate must be 'mean' or 'median'")
    agg = statistics.fmean if aggregate == "mean" else statistics.median
    methods = list(methods or [config.method])
    problem = load_problem(config)
    rows = []
    for method in methods:
        for k in ks:
            runs = []
            for rep in range(repeats):
                seed = config.seed if rep == 0 else int(derive_key(config.seed, rep)) >> 1
                cfg = replace(config, method=method, k=int(k), seed=seed)
                runs.append(run_experiment(cfg, problem).csv_row(rep))
            row = dict(runs[0])
            row["seed"] = config.seed
            row["repeat"] = repeats
            for key in ("spread_before", "half_width_before", "spread_after",
                        "half_width_after", "theta_solve", "theta_eval", "n_edges"):
                row[key] = agg([r[key] for r in runs])
            rows.append(row)
    return rows
