"""Graph data model, edge-list ingestion, probability assignment and
candidate-edge generation.

Graphs are stored as a pair of CSR structures (forward and reverse) over
dense node ids ``0..n-1``. The original integer labels from the input file
are kept in ``Graph.labels`` so reports can translate back.
"""
from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Malformed line in an edge-list, seed or candidate file."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ProbabilityRangeError(GraphFormatError):
    pass


@dataclass(frozen=True)
class LoadStats:
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph with per-edge propagation probabilities.

    Forward edges are sorted by ``(source, target)``; ``rev_eid`` maps each
    reverse-CSR slot back to its forward edge id, so an edge has one id no
    matter which direction it is traversed in.
    """

    n: int
    out_ptr: np.ndarray
    out_idx: np.ndarray
    out_p: np.ndarray
    in_ptr: np.ndarray
    in_idx: np.ndarray
    in_p: np.ndarray
    rev_eid: np.ndarray
    labels: np.ndarray
    stats: LoadStats = field(default_factory=LoadStats)

    @property
    def m(self) -> int:
        return int(self.out_idx.shape[0])

    @classmethod
    def from_edges(cls, n, src, dst, prob=None, labels=None, stats=None):
        """Build from parallel edge arrays. Edges must already be deduplicated
        and free of self-loops."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        m = src.shape[0]
        prob = np.zeros(m) if prob is None else np.asarray(prob, dtype=np.float64)
        if m and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        if np.any(src == dst):
            raise ValueError("self-loops are not allowed")
        if np.any((prob < 0) | (prob > 1)) or np.any(np.isnan(prob)):
            raise ProbabilityRangeError("probability outside [0, 1]")

        order = np.lexsort((dst, src))
        src, dst, prob = src[order], dst[order], prob[order]
        if m > 1:
            same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
            if same.any():
                raise ValueError("duplicate edges are not allowed")

        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
        out_idx = dst.astype(np.int32)

        rorder = np.lexsort((src, dst))
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
        in_idx = src[rorder].astype(np.int32)
        in_p = prob[rorder].copy()
        rev_eid = rorder.astype(np.int64)

        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64).copy()
        out_p = prob.copy()
        _freeze(out_ptr, out_idx, out_p, in_ptr, in_idx, in_p, rev_eid, labels)
        return cls(n, out_ptr, out_idx, out_p, in_ptr, in_idx, in_p, rev_eid,
                   labels, stats or LoadStats())

    # -- queries -----------------------------------------------------------

    def edges(self):
        """Return ``(src, dst, p)`` arrays in forward-CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.out_ptr))
        return src, self.out_idx.astype(np.int64), self.out_p.copy()

    def out_neighbors(self, u):
        return self.out_idx[self.out_ptr[u]:self.out_ptr[u + 1]]

    def in_neighbors(self, v):
        return self.in_idx[self.in_ptr[v]:self.in_ptr[v + 1]]

    def out_degree(self):
        return np.diff(self.out_ptr)

    def in_degree(self):
        return np.diff(self.in_ptr)

    def has_edge(self, u, v) -> bool:
        nbrs = self.out_neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.shape[0] and nbrs[i] == v)

    def prob(self, u, v) -> float:
        lo = self.out_ptr[u]
        nbrs = self.out_idx[lo:self.out_ptr[u + 1]]
        i = np.searchsorted(nbrs, v)
        if i < nbrs.shape[0] and nbrs[i] == v:
            return float(self.out_p[lo + i])
        raise KeyError((u, v))

    def index_of(self, label) -> int:
        idx = self._label_index().get(int(label))
        if idx is None:
            raise KeyError(f"unknown node label {label}")
        return idx

    def _label_index(self):
        cache = self.__dict__.get("_label_cache")
        if cache is None:
            cache = {int(lab): i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_label_cache", cache)
        return cache

    def with_probabilities(self, out_p):
        """Same topology, new forward-order probabilities."""
        src, dst, _ = self.edges()
        return Graph.from_edges(self.n, src, dst, out_p, self.labels, self.stats)

    def augmented(self, added):
        """Return ``G(A)``: this graph plus the candidate edges in ``added``.

        The base graph is left untouched.
        """
        added = list(added)
        if not added:
            return self
        src, dst, p = self.edges()
        a_src = np.array([e.u for e in added], dtype=np.int64)
        a_dst = np.array([e.v for e in added], dtype=np.int64)
        a_p = np.array([e.p for e in added], dtype=np.float64)
        for e in added:
            if self.has_edge(e.u, e.v):
                raise ValueError(f"added edge ({e.u}, {e.v}) already in graph")
        return Graph.from_edges(
            self.n,
            np.concatenate([src, a_src]),
            np.concatenate([dst, a_dst]),
            np.concatenate([p, a_p]),
            self.labels,
        )

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class SeedSet:
    """Sorted distinct seed ids plus a membership mask."""

    ids: np.ndarray
    mask: np.ndarray

    @classmethod
    def of(cls, n, ids):
        ids = np.unique(np.asarray(list(ids), dtype=np.int64))
        if ids.size and (ids[0] < 0 or ids[-1] >= n):
            raise ValueError("seed id out of range")
        mask = np.zeros(n, dtype=np.bool_)
        mask[ids] = True
        _freeze(ids, mask)
        return cls(ids, mask)

    def __len__(self):
        return int(self.ids.shape[0])

    def __contains__(self, v):
        return bool(self.mask[v])

    def __iter__(self):
        return iter(self.ids.tolist())

    def union(self, extra):
        return SeedSet.of(self.mask.shape[0], list(self.ids) + list(extra))


@dataclass(frozen=True, order=True)
class CandidateEdge:
    u: int
    v: int
    p: float

    @property
    def pair(self):
        return (self.u, self.v)


# -- ingestion -------------------------------------------------------------

def _iter_lines(source):
    if isinstance(source, (str, os.PathLike)) and not (
        isinstance(source, str) and "\n" in source
    ):
        with open(source) as fh:
            yield from fh
    elif isinstance(source, str):
        yield from io.StringIO(source)
    else:
        yield from source


def _tokens(source):
    """Yield ``(lineno, tokens)`` for non-blank, non-comment lines."""
    for lineno, line in enumerate(_iter_lines(source), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse_prob(tok, lineno):
    try:
        p = float(tok)
    except ValueError:
        raise GraphFormatError(f"bad probability {tok!r}", lineno) from None
    if not 0.0 <= p <= 1.0:
        raise ProbabilityRangeError(f"probability {p} outside [0, 1]", lineno)
    return p


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise GraphFormatError(f"bad node id {tok!r}", lineno) from None


def load_edge_list(source, directed=True) -> Graph:
    """Parse a ``u v [p]`` edge list.

    ``source`` may be a path, a string containing newlines, or any iterable of
    lines. Ids are densified in order of first appearance. Lines without a
    probability get 0 until :func:`assign_wic_probabilities` fills them in.
    Duplicate pairs keep their first occurrence; self-loops are dropped (both
    counted in ``graph.stats``). Undirected input yields both arcs.
    """
    index: dict[int, int] = {}
    labels: list[int] = []
    seen: set[tuple[int, int]] = set()
    src: list[int] = []
    dst: list[int] = []
    prob: list[float] = []
    dups = loops = 0

    def node(label):
        i = index.get(label)
        if i is None:
            i = index[label] = len(labels)
            labels.append(label)
        return i

    for lineno, toks in _tokens(source):
        if len(toks) not in (2, 3):
            raise GraphFormatError(f"expected 'u v [p]', got {len(toks)} fields", lineno)
        a = _parse_int(toks[0], lineno)
        b = _parse_int(toks[1], lineno)
        p = _parse_prob(toks[2], lineno) if len(toks) == 3 else 0.0
        u, v = node(a), node(b)
        if u == v:
            loops += 1
            continue
        arcs = [(u, v)] if directed else [(u, v), (v, u)]
        for arc in arcs:
            if arc in seen:
                dups += 1
                continue
            seen.add(arc)
            src.append(arc[0])
            dst.append(arc[1])
            prob.append(p)

    if dups or loops:
        logger.info("dropped %d duplicate edges and %d self-loops", dups, loops)
    return Graph.from_edges(len(labels), src, dst, prob, labels,
                            LoadStats(dups, loops))


def write_edge_list(graph, fh, with_probabilities=True):
    """Write the graph in original labels, one ``u v [p]`` line per edge."""
    src, dst, p = graph.edges()
    lab = graph.labels
    for a, b, q in zip(src, dst, p):
        if with_probabilities:
            fh.write(f"{lab[a]} {lab[b]} {float(q)!r}\n")
        else:
            fh.write(f"{lab[a]} {lab[b]}\n")


def assign_wic_probabilities(graph: Graph) -> Graph:
    """Weighted cascade: every edge into ``v`` gets probability 1/indeg(v)."""
    indeg = graph.in_degree()
    return graph.with_probabilities(1.0 / indeg[graph.out_idx])


def load_seeds(source, graph: Graph) -> SeedSet:
    """One original node label per line."""
    ids = []
    for lineno, toks in _tokens(source):
        if len(toks) != 1:
            raise GraphFormatError("expected one node id", lineno)
        try:
            ids.append(graph.index_of(_parse_int(toks[0], lineno)))
        except KeyError as exc:
            raise GraphFormatError(str(exc.args[0]), lineno) from None
    return SeedSet.of(graph.n, ids)


def write_seeds(graph, seeds, fh):
    for s in seeds:
        fh.write(f"{graph.labels[s]}\n")


def load_candidates(source, graph: Graph, seeds: SeedSet) -> list[CandidateEdge]:
    """Read ``u v p`` lines (original labels) and validate each candidate."""
    out = []
    for lineno, toks in _tokens(source):
        if len(toks) != 3:
            raise GraphFormatError("expected 'u v p'", lineno)
        try:
            u = graph.index_of(_parse_int(toks[0], lineno))
            v = graph.index_of(_parse_int(toks[1], lineno))
        except KeyError as exc:
            raise GraphFormatError(str(exc.args[0]), lineno) from None
        e = CandidateEdge(u, v, _parse_prob(toks[2], lineno))
        try:
            check_candidate(graph, seeds, e)
        except ValueError as exc:
            raise GraphFormatError(str(exc), lineno) from None
        out.append(e)
    return out


def write_candidates(graph, candidates, fh):
    lab = graph.labels
    for e in candidates:
        fh.write(f"{lab[e.u]} {lab[e.v]} {float(e.p)!r}\n")


def check_candidate(graph, seeds, e):
    if e.u not in seeds:
        raise ValueError(f"candidate source {e.u} is not a seed")
    if e.v in seeds:
        raise ValueError(f"candidate target {e.v} is a seed")
    if e.u == e.v:
        raise ValueError("candidate is a self-loop")
    if graph.has_edge(e.u, e.v):
        raise ValueError(f"candidate ({e.u}, {e.v}) already in graph")
    if not 0.0 <= e.p <= 1.0:
        raise ValueError(f"candidate probability {e.p} outside [0, 1]")


# -- candidates ------------------------------------------------------------

def _mean_probabilities(graph, fallback):
    """Average out-edge and in-edge probability per node (NaN if none)."""
    outdeg = graph.out_degree()
    indeg = graph.in_degree()
    src, dst, p = graph.edges()
    out_sum = np.bincount(src, weights=p, minlength=graph.n)
    in_sum = np.bincount(dst, weights=p, minlength=graph.n)
    with np.errstate(invalid="ignore", divide="ignore"):
        out_avg = np.where(outdeg > 0, out_sum / outdeg, fallback)
        in_avg = np.where(indeg > 0, in_sum / indeg, fallback)
    return out_avg, in_avg


def candidate_probability_table(graph, fallback=None):
    """Per-node ``(out_avg, in_avg)`` used by the candidate heuristic.

    A node without out-edges (resp. in-edges) takes ``fallback``, which
    defaults to the global mean edge probability.
    """
    if fallback is None:
        fallback = float(graph.out_p.mean()) if graph.m else 0.0
    return _mean_probabilities(graph, fallback)


def candidate_pool_size(graph, seeds):
    """``|S|·(n-|S|)`` minus existing seed-to-non-seed edges."""
    k = len(seeds)
    src, dst, _ = graph.edges()
    existing = int(np.count_nonzero(seeds.mask[src] & ~seeds.mask[dst]))
    return k * (graph.n - k) - existing


def generate_candidates(graph, seeds, mode="all", limit=None, seed=0,
                        fallback=None) -> list[CandidateEdge]:
    """Candidate edges from seeds to non-seeds that are not already in ``E``.

    ``mode="all"`` enumerates the whole pool; ``mode="sample"`` draws
    ``limit`` pairs uniformly without replacement. Each candidate's
    probability is the mean of the source's average out-edge probability and
    the target's average in-edge probability.

    Returns candidates sorted by ``(u, v)``.
    """
    if len(seeds) == 0:
        raise ValueError("seed set is empty")
    if mode not in ("all", "sample"):
        raise ValueError(f"unknown candidate mode {mode!r}")
    out_avg, in_avg = candidate_probability_table(graph, fallback)
    non_seeds = np.flatnonzero(~seeds.mask)

    if mode == "all":
        pairs = []
        for u in seeds:
            taken = set(graph.out_neighbors(u).tolist())
            pairs.extend((u, int(v)) for v in non_seeds if int(v) not in taken)
    else:
        if limit is None or limit < 0:
            raise ValueError("sample mode needs a non-negative limit")
        pool = candidate_pool_size(graph, seeds)
        if limit > pool:
            logger.warning("candidate limit %d exceeds pool size %d; clamping",
                           limit, pool)
            limit = pool
        rng = np.random.default_rng(seed)
        if 2 * limit >= pool:
            every = generate_candidates(graph, seeds, "all", fallback=fallback)
            pick = np.sort(rng.choice(len(every), size=limit, replace=False))
            return [every[i] for i in pick]
        chosen = set()
        while len(chosen) < limit:
            u = int(seeds.ids[rng.integers(len(seeds))])
            v = int(non_seeds[rng.integers(non_seeds.shape[0])])
            if (u, v) in chosen or graph.has_edge(u, v):
                continue
            chosen.add((u, v))
        pairs = sorted(chosen)

    return [CandidateEdge(u, v, float((out_avg[u] + in_avg[v]) / 2.0))
            for u, v in pairs]


# -- seed pickers ------------------------------------------------------------

def top_outdegree_seeds(graph, count) -> SeedSet:
    """Highest out-degree nodes, ties to the smaller id."""
    deg = graph.out_degree()
    order = np.lexsort((np.arange(graph.n), -deg))
    return SeedSet.of(graph.n, order[:count])


def random_seeds(graph, count, seed=0) -> SeedSet:
    rng = np.random.default_rng(seed)
    count = min(count, graph.n)
    return SeedSet.of(graph.n, rng.choice(graph.n, size=count, replace=False))
