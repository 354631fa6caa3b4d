"""Greedy edge selection over a shared RR collection with soft updates.

The score of a candidate ``(u, v, p)`` is ``p · Δ(v)``: adding the edge
covers, with probability ``p``, every still-uncovered RR set that contains
``v``. After each pick those sets are covered in place (one coin per set)
instead of regrowing the collection on the augmented graph.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_key
from .graph import CandidateEdge, Graph, SeedSet
from .rrsets import DEFAULT_CAP, RRCollection, sample_until_coverage

logger = logging.getLogger(__name__)

# stream tags so solver coins never collide with sampling streams
_SOFT_UPDATE_STREAM = 0x50F7


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 0.5
    delta: float = 0.001
    k: int = 50
    beta: float = 1.0
    seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")

    @property
    def lam(self) -> float:
        return derive_lambda(self.eps, self.k)

    def scaled_delta(self, n_candidates) -> float:
        return self.delta / (self.k * n_candidates)


@dataclass
class SolutionReport:
    edges: list
    scores: list
    theta: int
    coverage_initial: int
    coverage_final: int
    spread_before: float
    spread_after: float
    threshold: float = 0.0
    sampling_ms: float = 0.0
    selection_ms: float = 0.0
    cap_hit: bool = False
    degenerate: bool = False
    short: bool = False
    updates: list = field(default_factory=list)
    collection: RRCollection = field(default=None, repr=False)

    def to_dict(self, graph=None):
        lab = graph.labels if graph is not None else None

        def name(x):
            return int(lab[x]) if lab is not None else int(x)

        return {
            "edges": [[name(e.u), name(e.v), float(e.p)] for e in self.edges],
            "scores": [float(s) for s in self.scores],
            "theta": self.theta,
            "coverage_initial": self.coverage_initial,
            "coverage_final": self.coverage_final,
            "spread_before": self.spread_before,
            "spread_after": self.spread_after,
            "threshold": self.threshold,
            "flags": {"cap_hit": self.cap_hit, "degenerate": self.degenerate,
                      "short": self.short},
        }


def derive_lambda(eps, k) -> float:
    """Per-estimate relative error that keeps k greedy steps within ``eps``."""
    if eps <= 0 or k < 1:
        raise ValueError("need eps > 0 and k >= 1")
    x = eps / k
    return x / (2.0 + x)


def coverage_threshold(lam, delta, beta=1.0) -> float:
    """Coverage ``Λ(S)`` at which sampling may stop for a (λ, δ)-estimate,
    divided by ``beta`` when sample reduction is requested."""
    if not (0 < lam < 1 and 0 < delta < 1):
        raise ValueError("lam and delta must lie in (0, 1)")
    t = 2.0 * (1.0 + lam) * (1.0 + lam / 3.0) * math.log(2.0 / delta) / lam ** 2
    return t / beta


def soft_update(collection: RRCollection, edge: CandidateEdge, seed=0, step=0) -> int:
    """Apply the selection of ``edge`` to the collection.

    Every RR set that contains ``edge.v`` and is not yet covered becomes
    covered with probability ``edge.p``. The coin for set ``i`` at greedy
    step ``step`` comes from stream ``(seed, step)``. Returns the number of
    sets flipped.
    """
    key = derive_key(seed, _SOFT_UPDATE_STREAM, step)
    return collection.mark_covered(collection.sets_containing(edge.v), edge.p, key)


def _best(scores, alive):
    # candidates are kept sorted by (u, v), so argmax's first hit breaks ties
    masked = np.where(alive, scores, -np.inf)
    return int(np.argmax(masked))


def _sorted_candidates(candidates):
    order = sorted(range(len(candidates)), key=lambda i: candidates[i].pair)
    cands = [candidates[i] for i in order]
    pairs = [c.pair for c in cands]
    if len(set(pairs)) != len(pairs):
        raise ValueError("duplicate candidate edges")
    return cands


def select_edges(collection: RRCollection, candidates, k, seed=0):
    """Greedy selection of up to ``k`` edges maximising ``p · Δ(v)``.

    Mutates ``collection``. Returns ``(edges, scores, flags)`` where flags
    records ``degenerate`` (remaining slots filled by probability because
    every score hit zero) and ``short`` (fewer than ``k`` candidates).
    """
    cands = _sorted_candidates(candidates)
    short = k > len(cands)
    k = min(k, len(cands))
    p = np.array([c.p for c in cands], dtype=np.float64)
    v = np.array([c.v for c in cands], dtype=np.int64)
    alive = np.ones(len(cands), dtype=np.bool_)
    chosen, scores, updates = [], [], []
    degenerate = False
    for step in range(k):
        score = p * collection.delta[v]
        i = _best(score, alive)
        if score[i] <= 0.0:
            degenerate = True
            rest = list(np.flatnonzero(alive))
            rest.sort(key=lambda j: (-p[j], cands[j].pair))
            for j in rest[:k - step]:
                chosen.append(cands[j])
                scores.append(0.0)
            break
        alive[i] = False
        chosen.append(cands[i])
        scores.append(float(score[i]))
        updates.append(soft_update(collection, cands[i], seed, step))
    return chosen, scores, {"degenerate": degenerate, "short": short,
                            "updates": updates}


def solve(graph: Graph, seeds, candidates, config: SolverConfig) -> SolutionReport:
    """Sample RR sets to the coverage threshold and select ``config.k`` edges.

    The reported ``spread_after`` is ``n·Λ/θ`` read off the soft-updated
    collection.
    """
    if not isinstance(seeds, SeedSet):
        seeds = SeedSet.of(graph.n, seeds)
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate set is empty")
    lam = config.lam
    threshold = coverage_threshold(lam, config.scaled_delta(len(candidates)),
                                   config.beta)
    t0 = time.perf_counter()
    coll = sample_until_coverage(graph, seeds, threshold, cap=config.cap,
                                 seed=config.seed, truncate=True)
    t1 = time.perf_counter()
    if coll.cap_hit:
        logger.warning("sampling stopped at the cap of %d sets", config.cap)
    before = coll.spread()
    init = coll.coverage_count
    edges, scores, flags = select_edges(coll, candidates, config.k, config.seed)
    t2 = time.perf_counter()
    report = SolutionReport(
        edges=edges, scores=scores, theta=coll.theta, coverage_initial=init,
        coverage_final=coll.coverage_count, spread_before=before,
        spread_after=coll.spread(), threshold=threshold,
        sampling_ms=(t1 - t0) * 1e3, selection_ms=(t2 - t1) * 1e3,
        cap_hit=coll.cap_hit, degenerate=flags["degenerate"],
        short=flags["short"], updates=flags["updates"], collection=coll)
    return report
