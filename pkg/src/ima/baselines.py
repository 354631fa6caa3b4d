"""Comparison methods for edge selection.

All of them take candidates in any order and treat them in ``(u, v)``
order internally, so ties always resolve to the lexicographically smallest
pair.
"""
from __future__ import annotations

import enum
import heapq
import math

import numpy as np
from numba import njit

from ._rng import child_key, derive_key, edge_counter, uniform
from .graph import Graph, SeedSet
from .rrsets import RRCollection
from .solver import soft_update

_WORLD_STREAM = 0x3C6EF372


class BaselineKind(str, enum.Enum):
    RAND = "RAND"
    OUTDEG = "OUTDEG"
    PROB = "PROB"
    SINF = "SINF"
    AIS_NO_PROB = "AIS_NO_PROB"
    AIS_NO_UPDATE = "AIS_NO_UPDATE"
    MC_GREEDY = "MC_GREEDY"


def _canonical(candidates):
    return sorted(candidates, key=lambda c: c.pair)


def rand_select(candidates, k, seed=0):
    """Uniform ``k``-subset via a Fisher-Yates prefix shuffle."""
    pool = _canonical(candidates)
    rng = np.random.default_rng(seed)
    k = min(k, len(pool))
    for i in range(k):
        j = int(rng.integers(i, len(pool)))
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]


def outdeg_select(graph: Graph, candidates, k):
    """Targets with the largest out-degree first."""
    deg = graph.out_degree()
    ranked = sorted(candidates, key=lambda c: (-int(deg[c.v]), c.pair))
    return ranked[:max(k, 0)]


def prob_select(candidates, k):
    ranked = sorted(candidates, key=lambda c: (-c.p, c.pair))
    return ranked[:max(k, 0)]


def _best_edge_per_target(candidates):
    best = {}
    for c in _canonical(candidates):
        cur = best.get(c.v)
        if cur is None or c.p > cur.p:
            best[c.v] = c
    return best


def sinf_select(collection: RRCollection, candidates, k):
    """Top-``k`` candidate targets by initial marginal coverage, one edge
    (the most probable) per target. The collection is not updated."""
    best = _best_edge_per_target(candidates)
    delta = collection.delta
    targets = sorted(best, key=lambda v: (-int(delta[v]), v))
    return [best[v] for v in targets[:max(k, 0)]]


def ais_no_prob(collection: RRCollection, candidates, k, seed=0):
    """Greedy on ``Δ(v)`` alone, with soft updates using the true ``p``.

    Mutates ``collection``.
    """
    remaining = _canonical(candidates)
    chosen = []
    for step in range(min(k, len(remaining))):
        delta = collection.delta
        top = max(remaining, key=lambda c: (int(delta[c.v]), -c.v, c.p, -c.u))
        remaining.remove(top)
        chosen.append(top)
        soft_update(collection, top, seed, step)
    return chosen


def ais_no_update(collection: RRCollection, candidates, k):
    """``p · Δ(v)`` ranking on the frozen initial collection."""
    delta = collection.delta
    ranked = sorted(candidates, key=lambda c: (-(c.p * int(delta[c.v])), c.pair))
    return ranked[:max(k, 0)]


# -- MC-Greedy over shared live-edge worlds -----------------------------------

@njit(cache=True)
def _world_bfs(out_ptr, out_idx, out_p, key, reached, w, start, mark, stamp,
               queue, commit):
    """Count nodes reachable from ``start`` in world ``w`` that are not yet
    reached; mark them reached when ``commit`` is set."""
    n = mark.shape[0]
    if reached[w, start] or mark[start] == stamp:
        return 0
    mark[start] = stamp
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        x = queue[head]
        head += 1
        if commit:
            reached[w, x] = 1
        for j in range(out_ptr[x], out_ptr[x + 1]):
            y = out_idx[j]
            if reached[w, y] or mark[y] == stamp:
                continue
            p = out_p[j]
            if p >= 1.0 or (p > 0.0 and uniform(key, edge_counter(x, y, n)) < p):
                mark[y] = stamp
                queue[tail] = y
                tail += 1
    return tail


@njit(cache=True)
def _init_worlds(out_ptr, out_idx, out_p, seeds, keys, reached):
    n = out_ptr.shape[0] - 1
    mark = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    stamp = 0
    total = 0
    for w in range(keys.shape[0]):
        stamp += 1
        for s in seeds:
            if not reached[w, s] and mark[s] != stamp:
                # seeds of one world share a stamp so overlapping BFS trees merge
                total += _world_bfs(out_ptr, out_idx, out_p, keys[w], reached, w,
                                    s, mark, stamp, queue, True)
    return total


@njit(cache=True)
def _gain(out_ptr, out_idx, out_p, keys, reached, v, cand_counter, cand_p,
          commit):
    n = out_ptr.shape[0] - 1
    mark = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    total = 0
    for w in range(keys.shape[0]):
        if reached[w, v]:
            continue
        if not (cand_p >= 1.0 or (cand_p > 0.0 and uniform(keys[w], cand_counter) < cand_p)):
            continue
        total += _world_bfs(out_ptr, out_idx, out_p, keys[w], reached, w, v,
                            mark, w + 1, queue, commit)
    return total


class WorldEnsemble:
    """``r`` fixed live-edge worlds over the graph plus a candidate pool.

    World ``w`` is keyed by ``(seed, w)``; edge or candidate ``(u, v)`` is live
    when draw ``edge_counter(u, v, n)`` of that key falls below its
    probability, the same coin a forward cascade in that world uses. Averaged
    over the worlds, the reached-node count is a monotone submodular function
    of the chosen candidate set, so lazy and plain greedy agree exactly on it.
    """

    def __init__(self, graph: Graph, seeds, candidates, r, seed=0):
        if r < 1:
            raise ValueError("r must be >= 1")
        self.graph = graph
        self.seeds = seeds if isinstance(seeds, SeedSet) else SeedSet.of(graph.n, seeds)
        self.candidates = _canonical(candidates)
        self.r = int(r)
        master = derive_key(seed, _WORLD_STREAM)
        self.keys = np.array([child_key(master, np.uint64(w)) for w in range(self.r)],
                             dtype=np.uint64)
        self.reached = np.zeros((self.r, graph.n), dtype=np.uint8)
        self.total = int(_init_worlds(graph.out_ptr, graph.out_idx, graph.out_p,
                                      self.seeds.ids, self.keys, self.reached))

    def live_bits(self, w):
        """Live/blocked bits of world ``w``: base edges then candidates."""
        g = self.graph
        src, dst, p = g.edges()
        src = np.concatenate([src, [c.u for c in self.candidates]]).astype(np.int64)
        dst = np.concatenate([dst, [c.v for c in self.candidates]]).astype(np.int64)
        p = np.concatenate([p, [c.p for c in self.candidates]])
        key = self.keys[w]
        draws = np.array([uniform(key, edge_counter(a, b, g.n)) for a, b in zip(src, dst)])
        return (p >= 1.0) | ((p > 0.0) & (draws < p))

    def _call(self, c, commit):
        e = self.candidates[c]
        g = self.graph
        return int(_gain(g.out_ptr, g.out_idx, g.out_p, self.keys, self.reached,
                         e.v, edge_counter(e.u, e.v, g.n), float(e.p), commit))

    def gain(self, c) -> int:
        """Extra reached nodes, summed over worlds, from adding candidate ``c``."""
        return self._call(c, False)

    def commit(self, c) -> int:
        added = self._call(c, True)
        self.total += added
        return added

    def spread(self) -> float:
        return self.total / self.r


def mc_greedy(graph: Graph, seeds, candidates, k, r, seed=0):
    """Lazy (CELF) greedy on the shared-world spread estimate."""
    ens = WorldEnsemble(graph, seeds, candidates, r, seed)
    cands = ens.candidates
    # entries: (-gain, index, round in which gain was computed)
    heap = [(-ens.gain(c), c, 0) for c in range(len(cands))]
    heapq.heapify(heap)
    chosen = []
    rnd = 0
    while heap and len(chosen) < k:
        neg, c, stamp = heapq.heappop(heap)
        if stamp == rnd:
            ens.commit(c)
            chosen.append(cands[c])
            rnd += 1
        else:
            heapq.heappush(heap, (-ens.gain(c), c, rnd))
    return chosen


def mc_greedy_theoretical_r(n, k, n_candidates, eps, delta) -> int:
    """Order-of-magnitude simulation count ``k² n ln(k|E_C|/δ) / ε²`` behind
    the MC-Greedy guarantee (constants omitted)."""
    return math.ceil(k * k * n * math.log(k * n_candidates / delta) / eps ** 2)


def run_baseline(kind, graph, seeds, candidates, k, *, collection=None, r=10000,
                 seed=0):
    """Dispatch on :class:`BaselineKind`. RR-based methods need
    ``collection``; ``AIS_NO_PROB`` mutates it."""
    kind = BaselineKind(kind)
    if kind is BaselineKind.RAND:
        return rand_select(candidates, k, seed)
    if kind is BaselineKind.OUTDEG:
        return outdeg_select(graph, candidates, k)
    if kind is BaselineKind.PROB:
        return prob_select(candidates, k)
    if kind is BaselineKind.MC_GREEDY:
        return mc_greedy(graph, seeds, candidates, k, r, seed)
    if collection is None:
        raise ValueError(f"{kind.value} needs an RR collection")
    if kind is BaselineKind.SINF:
        return sinf_select(collection, candidates, k)
    if kind is BaselineKind.AIS_NO_PROB:
        return ais_no_prob(collection, candidates, k, seed)
    return ais_no_update(collection, candidates, k)
