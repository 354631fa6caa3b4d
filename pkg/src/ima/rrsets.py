"""Reverse-reachable set sampling and the coverage index the solver mutates.

A collection keeps its sets in one flat arena (``members`` + ``offsets``),
the root of each set stored first. Alongside it live the per-set coverage
flag ``covered`` (set is reached by the seeds), the per-node marginal
counter ``delta`` (uncovered sets containing the node) and an inverted index
``node -> set ids``.

Set ``i`` draws its randomness from stream ``(seed, i)``, so a collection is
the same whether it is generated in one pass or in batches.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import child_key, derive_key, edge_counter, uniform
from .graph import Graph, SeedSet

DEFAULT_CAP = 50_000_000

_MAGIC = b"RRSC"
_VERSION = 1


class AuditError(AssertionError):
    pass


@dataclass(frozen=True)
class RRSet:
    root: int
    members: tuple
    truncated: bool


@njit(cache=True)
def _rr_one(in_ptr, in_idx, in_p, seed_mask, key, truncate, root,
            visited, epoch, out, pos):
    """Reverse BFS from ``root`` writing members into ``out[pos:]``.

    Returns ``(size, truncated, hit)``. With ``truncate`` set, generation
    stops as soon as a seed joins the set.
    """
    n = visited.shape[0]
    visited[root] = epoch
    out[pos] = root
    size = 1
    if seed_mask[root]:
        return size, truncate, True
    hit = False
    head = 0
    while head < size:
        w = out[pos + head]
        head += 1
        for j in range(in_ptr[w], in_ptr[w + 1]):
            u = in_idx[j]
            if visited[u] == epoch:
                continue
            p = in_p[j]
            if p >= 1.0 or (p > 0.0 and uniform(key, edge_counter(u, w, n)) < p):
                visited[u] = epoch
                out[pos + size] = u
                size += 1
                if seed_mask[u]:
                    hit = True
                    if truncate:
                        return size, True, True
    return size, False, hit


@njit(cache=True)
def _draw_root(key, n):
    r = np.int64(uniform(key, 0) * n)
    return r if r < n else n - 1


@njit(cache=True)
def _sample_until(in_ptr, in_idx, in_p, seed_mask, master, truncate,
                  target, cap, start):
    """Sample sets ``start, start+1, ...`` until ``target`` of them hit the
    seeds or ``cap`` sets exist."""
    n = in_ptr.shape[0] - 1
    visited = np.zeros(n, dtype=np.int64)
    size_hint = 1024
    members = np.empty(max(size_hint, 4 * n), dtype=np.int32)
    offsets = np.empty(size_hint + 1, dtype=np.int64)
    trunc = np.empty(size_hint, dtype=np.bool_)
    hits = np.empty(size_hint, dtype=np.bool_)
    offsets[0] = 0
    theta = 0
    covered = 0
    pos = 0
    while covered < target and theta < cap:
        if theta + 1 >= offsets.shape[0]:
            grow = offsets.shape[0] * 2
            o2 = np.empty(grow, dtype=np.int64)
            o2[:theta + 1] = offsets[:theta + 1]
            offsets = o2
            t2 = np.empty(grow, dtype=np.bool_)
            t2[:theta] = trunc[:theta]
            trunc = t2
            h2 = np.empty(grow, dtype=np.bool_)
            h2[:theta] = hits[:theta]
            hits = h2
        if pos + n > members.shape[0]:
            m2 = np.empty(members.shape[0] * 2 + n, dtype=np.int32)
            m2[:pos] = members[:pos]
            members = m2
        key = child_key(master, np.uint64(start + theta))
        root = _draw_root(key, n)
        size, tr, hit = _rr_one(in_ptr, in_idx, in_p, seed_mask, key, truncate,
                                root, visited, theta + 1, members, pos)
        pos += size
        trunc[theta] = tr
        hits[theta] = hit
        if hit:
            covered += 1
        theta += 1
        offsets[theta] = pos
    return (members[:pos].copy(), offsets[:theta + 1].copy(),
            trunc[:theta].copy(), hits[:theta].copy())


@njit(cache=True)
def _cover_sets(set_ids, coins, p, covered, delta, members, offsets):
    """Flip uncovered sets in ``set_ids`` whose coin is below ``p``."""
    flipped = 0
    for t in range(set_ids.shape[0]):
        i = set_ids[t]
        if covered[i]:
            continue
        if p >= 1.0 or (p > 0.0 and coins[t] < p):
            covered[i] = 1
            flipped += 1
            for j in range(offsets[i], offsets[i + 1]):
                delta[members[j]] -= 1
    return flipped


@njit(cache=True)
def _coins_for(set_ids, key):
    out = np.empty(set_ids.shape[0])
    for t in range(set_ids.shape[0]):
        out[t] = uniform(key, set_ids[t])
    return out


@dataclass(eq=False)
class RRCollection:
    """A sampled collection of RR sets plus its coverage bookkeeping."""

    n: int
    seeds: SeedSet
    members: np.ndarray
    offsets: np.ndarray
    truncated: np.ndarray
    covered: np.ndarray
    delta: np.ndarray
    post_ptr: np.ndarray
    post_ids: np.ndarray
    coverage_count: int
    threshold: float = 0.0
    cap_hit: bool = False
    initial_coverage: int = 0
    set_of_member: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, n, seeds, members, offsets, truncated, threshold=0.0,
              cap_hit=False):
        members = np.asarray(members, dtype=np.int32)
        offsets = np.asarray(offsets, dtype=np.int64)
        theta = offsets.shape[0] - 1
        lengths = np.diff(offsets)
        owner = np.repeat(np.arange(theta, dtype=np.int64), lengths)
        hit_member = seeds.mask[members]
        covered = np.zeros(theta, dtype=np.uint8)
        covered[owner[hit_member]] = 1
        live = covered[owner] == 0
        delta = np.bincount(members[live], minlength=n).astype(np.int64)
        order = np.argsort(members, kind="stable")
        post_ids = owner[order]
        post_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(members, minlength=n), out=post_ptr[1:])
        lam = int(covered.sum())
        return cls(n, seeds, members, offsets, np.asarray(truncated, dtype=np.bool_),
                   covered, delta, post_ptr, post_ids, lam, float(threshold),
                   bool(cap_hit), lam, owner)

    @property
    def theta(self) -> int:
        return int(self.offsets.shape[0] - 1)

    def __len__(self):
        return self.theta

    def __getitem__(self, i) -> RRSet:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        m = self.members[lo:hi]
        return RRSet(int(m[0]), tuple(int(x) for x in m), bool(self.truncated[i]))

    def sets_containing(self, v):
        return self.post_ids[self.post_ptr[v]:self.post_ptr[v + 1]]

    def spread(self) -> float:
        """``n·Λ/θ`` from the maintained coverage count."""
        if self.theta == 0:
            raise RuntimeError("empty RR collection")
        return self.n * self.coverage_count / self.theta

    def mark_covered(self, set_ids, p, key) -> int:
        """Cover each uncovered set in ``set_ids`` with probability ``p``,
        drawing the coin for set ``i`` from ``uniform(key, i)``."""
        set_ids = np.asarray(set_ids, dtype=np.int64)
        coins = _coins_for(set_ids, key)
        flipped = _cover_sets(set_ids, coins, float(p), self.covered, self.delta,
                              self.members, self.offsets)
        self.coverage_count += int(flipped)
        return int(flipped)

    def copy(self):
        return RRCollection(self.n, self.seeds, self.members, self.offsets,
                            self.truncated, self.covered.copy(), self.delta.copy(),
                            self.post_ptr, self.post_ids, self.coverage_count,
                            self.threshold, self.cap_hit, self.initial_coverage,
                            self.set_of_member)

    def audit(self):
        """Recount everything from the raw sets; raise :class:`AuditError` on
        any mismatch."""
        owner = self.set_of_member
        hit = np.zeros(self.theta, dtype=np.bool_)
        hit[owner[self.seeds.mask[self.members]]] = True
        if np.any(hit & (self.covered == 0)):
            raise AuditError("a set reached by the seeds is marked uncovered")
        live = self.covered[owner] == 0
        delta = np.bincount(self.members[live], minlength=self.n)
        if not np.array_equal(delta, self.delta):
            raise AuditError("marginal counters disagree with recount")
        if int(self.covered.sum()) != self.coverage_count:
            raise AuditError("coverage count disagrees with recount")
        if self.coverage_count < self.initial_coverage:
            raise AuditError("coverage count decreased")
        order = np.lexsort((self.members, owner))
        so, sm = owner[order], self.members[order]
        if np.any((so[1:] == so[:-1]) & (sm[1:] == sm[:-1])):
            raise AuditError("a set has repeated members")
        if np.any(self.truncated & ~hit):
            raise AuditError("a truncated set holds no seed")
        post_node = np.repeat(np.arange(self.n), np.diff(self.post_ptr))
        a = np.lexsort((self.post_ids, post_node))
        b = np.lexsort((owner, self.members))
        if not (np.array_equal(post_node[a], self.members[b])
                and np.array_equal(self.post_ids[a], owner[b])):
            raise AuditError("inverted index inconsistent with stored sets")
        return True

    # -- binary dump -------------------------------------------------------

    def dump(self, fh):
        """Header ``magic, version, n, θ`` then length-prefixed member lists,
        little-endian uint32."""
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _VERSION, self.n, self.theta))
        lengths = np.diff(self.offsets).astype("<u4")
        for i in range(self.theta):
            fh.write(lengths[i].tobytes())
            fh.write(self.members[self.offsets[i]:self.offsets[i + 1]].astype("<u4").tobytes())

    @classmethod
    def restore(cls, fh, seeds):
        """Inverse of :meth:`dump`. Coverage is recomputed from ``seeds``;
        truncation flags are not stored and come back as False."""
        if fh.read(4) != _MAGIC:
            raise ValueError("not an RR collection dump")
        version, n, theta = struct.unpack("<III", fh.read(12))
        if version != _VERSION:
            raise ValueError(f"unsupported dump version {version}")
        chunks = []
        offsets = np.zeros(theta + 1, dtype=np.int64)
        for i in range(theta):
            (length,) = struct.unpack("<I", fh.read(4))
            chunks.append(np.frombuffer(fh.read(4 * length), dtype="<u4"))
            offsets[i + 1] = offsets[i] + length
        members = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)
        return cls.build(n, seeds, members.astype(np.int32), offsets,
                         np.zeros(theta, dtype=np.bool_))


def _seedset(graph, seeds):
    return seeds if isinstance(seeds, SeedSet) else SeedSet.of(graph.n, seeds)


def sample_rr_set(graph: Graph, seeds, truncate=True, seed=0, index=0,
                  root=None) -> RRSet:
    """Draw RR set number ``index`` of stream ``seed``.

    ``root`` overrides the uniform root choice (test hook).
    """
    s = _seedset(graph, seeds)
    key = derive_key(seed, index)
    if root is None:
        root = int(_draw_root(key, graph.n))
    visited = np.zeros(graph.n, dtype=np.int64)
    out = np.empty(graph.n, dtype=np.int32)
    size, tr, _ = _rr_one(graph.in_ptr, graph.in_idx, graph.in_p, s.mask, key,
                          bool(truncate), int(root), visited, 1, out, 0)
    return RRSet(int(root), tuple(int(x) for x in out[:size]), bool(tr))


def sample_until_coverage(graph: Graph, seeds, threshold, cap=DEFAULT_CAP,
                          seed=0, truncate=True) -> RRCollection:
    """Sample RR sets until ``⌈threshold⌉`` of them intersect the seeds.

    Stops early at ``cap`` sets and flags the collection with ``cap_hit``.
    """
    s = _seedset(graph, seeds)
    if len(s) == 0:
        raise ValueError("seed set is empty")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    target = math.ceil(threshold)
    members, offsets, trunc, hits = _sample_until(
        graph.in_ptr, graph.in_idx, graph.in_p, s.mask, derive_key(seed),
        bool(truncate), target, int(cap), 0)
    cap_hit = int(hits.sum()) < target
    return RRCollection.build(graph.n, s, members, offsets, trunc, threshold, cap_hit)


def sample_fixed(graph: Graph, seeds, theta, seed=0, truncate=False) -> RRCollection:
    """Exactly ``theta`` RR sets, no stopping rule."""
    s = _seedset(graph, seeds)
    members, offsets, trunc, _ = _sample_until(
        graph.in_ptr, graph.in_idx, graph.in_p, s.mask, derive_key(seed),
        bool(truncate), np.iinfo(np.int64).max, int(theta), 0)
    return RRCollection.build(graph.n, s, members, offsets, trunc)


def coverage(collection: RRCollection, nodes) -> int:
    """Number of stored sets intersecting ``nodes`` (raw membership; ignores
    soft-update flags)."""
    nodes = np.asarray(list(nodes), dtype=np.int64)
    if nodes.size == 0:
        return 0
    mask = np.zeros(collection.n, dtype=np.bool_)
    mask[nodes] = True
    owners = collection.set_of_member[mask[collection.members]]
    return int(np.unique(owners).shape[0])


def estimate_spread(collection: RRCollection, nodes, n=None) -> float:
    """``n · coverage / θ``."""
    if collection.theta == 0:
        raise RuntimeError("empty RR collection")
    n = collection.n if n is None else n
    return n * coverage(collection, nodes) / collection.theta
