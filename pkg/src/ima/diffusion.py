"""Forward Independent Cascade simulation and the exact small-instance oracle.

``exact_spread`` enumerates every live/blocked assignment of the stochastic
edges (those with ``0 < p < 1``) and is the ground truth the test-suite checks
everything else against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._rng import child_key, derive_key, edge_counter, uniform
from .graph import Graph, SeedSet

#: Largest number of stochastic edges exact enumeration will accept.
EXACT_EDGE_LIMIT = 22


class CapacityError(RuntimeError):
    """Instance too large for exact enumeration."""


@dataclass(frozen=True)
class SpreadEstimate:
    value: float
    sample_count: int
    half_width: float
    guaranteed: bool = True


def _as_seedset(graph, seeds):
    return seeds if isinstance(seeds, SeedSet) else SeedSet.of(graph.n, seeds)


@njit(cache=True)
def _cascade(out_ptr, out_idx, out_p, seeds, key, visited, queue, epoch):
    """One IC run: the reachable set of seeds in live-edge world ``key``."""
    n = visited.shape[0]
    head = 0
    tail = 0
    for s in seeds:
        if visited[s] != epoch:
            visited[s] = epoch
            queue[tail] = s
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        for j in range(out_ptr[u], out_ptr[u + 1]):
            w = out_idx[j]
            if visited[w] == epoch:
                continue
            p = out_p[j]
            if p >= 1.0 or (p > 0.0 and uniform(key, edge_counter(u, w, n)) < p):
                visited[w] = epoch
                queue[tail] = w
                tail += 1
    return tail


@njit(cache=True)
def _cascade_many(out_ptr, out_idx, out_p, seeds, master, r, counts):
    n = out_ptr.shape[0] - 1
    visited = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for i in range(r):
        counts[i] = _cascade(out_ptr, out_idx, out_p, seeds,
                             child_key(master, np.uint64(i)), visited, queue, i + 1)


def simulate_ic(graph: Graph, added_edges, seeds, seed=0) -> int:
    """Run one cascade on ``G(added_edges)`` from ``seeds``; return the number
    of activated nodes. ``seed`` selects the live-edge world."""
    g = graph.augmented(added_edges)
    s = _as_seedset(graph, seeds)
    visited = np.zeros(g.n, dtype=np.int64)
    queue = np.empty(g.n, dtype=np.int64)
    return int(_cascade(g.out_ptr, g.out_idx, g.out_p, s.ids,
                        derive_key(seed), visited, queue, 1))


def monte_carlo_spread(graph: Graph, added_edges, seeds, r, seed=0) -> SpreadEstimate:
    """Mean activated count over ``r`` independent cascades, with a 95%
    normal-approximation half-width."""
    if r < 1:
        raise ValueError("r must be >= 1")
    g = graph.augmented(added_edges)
    s = _as_seedset(graph, seeds)
    counts = np.empty(r, dtype=np.int64)
    _cascade_many(g.out_ptr, g.out_idx, g.out_p, s.ids, derive_key(seed), r, counts)
    mean = float(counts.mean())
    sd = float(counts.std(ddof=1)) if r > 1 else 0.0
    return SpreadEstimate(mean, r, 1.96 * sd / math.sqrt(r))


# -- exact oracle ------------------------------------------------------------

@njit(cache=True)
def _enumerate_worlds(out_ptr, out_idx, out_p, seed_mask, stoch_eid, stoch_p):
    n = out_ptr.shape[0] - 1
    m = out_idx.shape[0]
    k = stoch_eid.shape[0]
    # edge state: 1 live, 0 blocked; stochastic entries rewritten per world
    live = np.zeros(m, dtype=np.uint8)
    for j in range(m):
        if out_p[j] >= 1.0:
            live[j] = 1
    visited = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0.0
    for mask in range(1 << k):
        w = 1.0
        for b in range(k):
            if (mask >> b) & 1:
                live[stoch_eid[b]] = 1
                w *= stoch_p[b]
            else:
                live[stoch_eid[b]] = 0
                w *= 1.0 - stoch_p[b]
        epoch = mask + 1
        head = 0
        tail = 0
        for v in range(n):
            if seed_mask[v]:
                visited[v] = epoch
                queue[tail] = v
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for j in range(out_ptr[u], out_ptr[u + 1]):
                x = out_idx[j]
                if live[j] and visited[x] != epoch:
                    visited[x] = epoch
                    queue[tail] = x
                    tail += 1
        total += w * tail
    return total


def stochastic_edge_count(graph: Graph) -> int:
    p = graph.out_p
    return int(np.count_nonzero((p > 0.0) & (p < 1.0)))


def exact_spread(graph: Graph, added_edges, seeds, limit=EXACT_EDGE_LIMIT) -> float:
    """Expected spread of ``seeds`` on ``G(added_edges)`` by full enumeration
    of the live-edge worlds over the stochastic edges."""
    g = graph.augmented(added_edges)
    s = _as_seedset(graph, seeds)
    p = g.out_p
    stoch = np.flatnonzero((p > 0.0) & (p < 1.0))
    if stoch.shape[0] > limit:
        raise CapacityError(
            f"{stoch.shape[0]} stochastic edges exceed the enumeration bound of {limit}")
    return float(_enumerate_worlds(g.out_ptr, g.out_idx, p, s.mask,
                                   stoch.astype(np.int64), p[stoch].copy()))


def exact_augmented_identity_check(graph, added_edges, seeds, edge):
    """Both sides of the augmentation identity for candidate ``edge``.

    ``lhs`` is the spread after adding ``edge``; ``rhs`` mixes the spread
    with ``edge.v`` promoted to a seed and the spread without it, weighted by
    the edge probability.
    """
    added_edges = list(added_edges)
    s = _as_seedset(graph, seeds)
    lhs = exact_spread(graph, added_edges + [edge], s)
    with_v = exact_spread(graph, added_edges, s.union([edge.v]))
    without = exact_spread(graph, added_edges, s)
    return lhs, edge.p * with_v + (1.0 - edge.p) * without
