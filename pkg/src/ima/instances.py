"""Small generated instances for tests, demos and the acceptance harness."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graph import (CandidateEdge, Graph, SeedSet, assign_wic_probabilities,
                    generate_candidates, top_outdegree_seeds, write_candidates,
                    write_edge_list, write_seeds)


@dataclass
class Instance:
    graph: Graph
    seeds: SeedSet
    candidates: list

    def write(self, directory):
        """Write ``graph.txt``, ``seeds.txt`` and ``candidates.txt``."""
        os.makedirs(directory, exist_ok=True)
        paths = {name: os.path.join(directory, f"{name}.txt")
                 for name in ("graph", "seeds", "candidates")}
        with open(paths["graph"], "w") as fh:
            write_edge_list(self.graph, fh)
        with open(paths["seeds"], "w") as fh:
            write_seeds(self.graph, self.seeds, fh)
        with open(paths["candidates"], "w") as fh:
            write_candidates(self.graph, self.candidates, fh)
        return paths


def path(n=3, p=1.0):
    """``0 -> 1 -> ... -> n-1``, seeded at 0."""
    if n < 2:
        raise ValueError("path needs n >= 2")
    g = Graph.from_edges(n, np.arange(n - 1), np.arange(1, n), np.full(n - 1, p))
    s = SeedSet.of(n, [0])
    return Instance(g, s, generate_candidates(g, s, "all"))


def star(n=5, p=1.0):
    """Hub 0 pointing at leaves ``1..n-1``; seeded at leaf 1."""
    if n < 3:
        raise ValueError("star needs n >= 3")
    g = Graph.from_edges(n, np.zeros(n - 1, dtype=np.int64), np.arange(1, n),
                         np.full(n - 1, p))
    s = SeedSet.of(n, [1])
    return Instance(g, s, generate_candidates(g, s, "all"))


def erdos_renyi(n=10, p_edge=0.2, seed=0, n_seeds=1):
    """Directed G(n, p) with weighted-cascade probabilities and the
    highest out-degree nodes as seeds."""
    if n < 2 or not 0 <= p_edge <= 1:
        raise ValueError("need n >= 2 and p_edge in [0, 1]")
    rng = np.random.default_rng(seed)
    adj = rng.random((n, n)) < p_edge
    np.fill_diagonal(adj, False)
    src, dst = np.nonzero(adj)
    g = assign_wic_probabilities(Graph.from_edges(n, src, dst))
    s = top_outdegree_seeds(g, n_seeds)
    return Instance(g, s, generate_candidates(g, s, "all"))


def two_cluster(hubs=3, leaves=4, bridges=3, branch=3, p_branch=0.5,
                p_hub_candidate=0.9, p_bridge_candidate=0.5):
    """Seed cluster with well-connected hubs and an unreached second cluster.

    Cluster 1: seed 0 -> relay -> ``hubs`` hub nodes, each hub -> ``leaves``
    leaves, all deterministic, so every hub is already active. Cluster 2:
    ``bridges`` head nodes, each with ``branch`` children reached with
    probability ``p_branch``, each child with one deterministic grandchild.

    Candidates point from the seed at every hub (high out-degree, high
    probability, zero marginal value) and at every bridge head (lower degree
    and probability, positive value), so degree and probability heuristics
    pick the hubs while diffusion-aware selection picks the bridges.
    """
    src, dst, prob = [], [], []

    def edge(a, b, p):
        src.append(a)
        dst.append(b)
        prob.append(p)

    seed, relay = 0, 1
    nxt = 2
    edge(seed, relay, 1.0)
    hub_ids = []
    for _ in range(hubs):
        h = nxt
        nxt += 1
        hub_ids.append(h)
        edge(relay, h, 1.0)
        for _ in range(leaves):
            edge(h, nxt, 1.0)
            nxt += 1
    head_ids = []
    for _ in range(bridges):
        b = nxt
        nxt += 1
        head_ids.append(b)
        for _ in range(branch):
            c = nxt
            edge(b, c, p_branch)
            edge(c, c + 1, 1.0)
            nxt += 2
    n = nxt
    g = Graph.from_edges(n, src, dst, prob)
    s = SeedSet.of(n, [seed])
    cands = ([CandidateEdge(seed, h, p_hub_candidate) for h in hub_ids]
             + [CandidateEdge(seed, b, p_bridge_candidate) for b in head_ids])
    return Instance(g, s, cands)


KINDS = {
    "path": path,
    "star": star,
    "erdos_renyi": erdos_renyi,
    "two_cluster": two_cluster,
}


def gen_instance(kind, params=None, seed=0) -> Instance:
    """Build an instance of ``kind`` with keyword ``params``."""
    try:
        factory = KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown instance kind {kind!r}") from None
    params = dict(params or {})
    if kind == "erdos_renyi":
        params.setdefault("seed", seed)
    return factory(**params)


def random_small_instance(rng, n_max=8, stoch_max=12, levels=None, n_cand_max=6,
                          n_seeds=1):
    """Random oracle-sized instance: up to ``stoch_max`` edges with
    probabilities drawn from ``levels`` (0.1..0.9 by default), plus a random
    subset of at most ``n_cand_max`` candidate edges."""
    if levels is None:
        levels = np.round(np.arange(1, 10) / 10, 1)
    n = int(rng.integers(max(3, n_seeds + 2), n_max + 1))
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    m = int(rng.integers(1, min(stoch_max, len(pairs)) + 1))
    pick = rng.choice(len(pairs), size=m, replace=False)
    src = [pairs[i][0] for i in pick]
    dst = [pairs[i][1] for i in pick]
    prob = rng.choice(levels, size=m)
    g = Graph.from_edges(n, src, dst, prob)
    s = SeedSet.of(n, rng.choice(n, size=n_seeds, replace=False))
    pool = [(int(u), v) for u in s for v in range(n)
            if v not in s and not g.has_edge(int(u), v)]
    n_c = min(len(pool), n_cand_max)
    chosen = sorted(rng.choice(len(pool), size=n_c, replace=False)) if n_c else []
    cands = [CandidateEdge(pool[i][0], pool[i][1], float(rng.choice(levels)))
             for i in chosen]
    return Instance(g, s, cands)
