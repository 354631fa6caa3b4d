import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ima.graph import (CandidateEdge, Graph, GraphFormatError, ProbabilityRangeError,
                       SeedSet, assign_wic_probabilities, candidate_pool_size,
                       check_candidate, generate_candidates, load_candidates,
                       load_edge_list, load_seeds, top_outdegree_seeds,
                       write_edge_list)


def test_load_simple_directed():
    g = load_edge_list(["0 1", "1 2"])
    assert (g.n, g.m) == (3, 2)
    assert g.out_neighbors(0).tolist() == [1]
    assert g.in_neighbors(2).tolist() == [1]


def test_duplicates_keep_first():
    g = load_edge_list(["0 1 0.5", "0 1 0.9"])
    assert g.m == 1
    assert g.prob(0, 1) == 0.5
    assert g.stats.duplicates_dropped == 1


def test_self_loop_dropped():
    g = load_edge_list(["0 0 1.0"])
    assert g.m == 0
    assert g.stats.self_loops_dropped == 1


def test_undirected_materializes_both_arcs():
    g = load_edge_list("5 7 0.3\n", directed=False)
    assert g.m == 2
    assert g.prob(0, 1) == g.prob(1, 0) == 0.3


def test_comments_and_blank_lines():
    g = load_edge_list(["# header", "", "10 20  # trailing", "20 30 0.25"])
    assert g.labels.tolist() == [10, 20, 30]
    assert g.prob(1, 2) == 0.25
    assert g.prob(0, 1) == 0.0


@pytest.mark.parametrize("line", ["0", "0 1 2 3", "a b", "0 1 x"])
def test_malformed_line_reports_line_number(line):
    with pytest.raises(GraphFormatError, match="line 2"):
        load_edge_list(["0 1", line])


def test_probability_range_error():
    with pytest.raises(ProbabilityRangeError):
        load_edge_list(["0 1 1.5"])


def test_load_from_path(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2\n2 3\n")
    assert load_edge_list(str(path)).m == 2


def test_round_trip_reproduces_deduped_edges():
    text = "3 1 0.2\n1 2 0.7\n3 1 0.9\n2 2 1.0\n4 3 0.125\n"
    g = load_edge_list(text)
    buf = io.StringIO()
    write_edge_list(g, buf)
    g2 = load_edge_list(buf.getvalue())
    key = lambda gr: sorted((int(gr.labels[a]), int(gr.labels[b]), float(p))
                            for a, b, p in zip(*gr.edges()))
    assert key(g) == key(g2)
    assert key(g) == [(1, 2, 0.7), (3, 1, 0.2), (4, 3, 0.125)]


@pytest.mark.parametrize("edges, expect", [
    ([(0, 2), (1, 2)], {(0, 2): 0.5, (1, 2): 0.5}),
    ([(0, 1)], {(0, 1): 1.0}),
    ([(i, 9) for i in range(4)], {(i, 9): 0.25 for i in range(4)}),
])
def test_wic(edges, expect):
    g = assign_wic_probabilities(load_edge_list([f"{a} {b}" for a, b in edges]))
    for (a, b), p in expect.items():
        assert g.prob(g.index_of(a), g.index_of(b)) == p


def test_wic_overwrites_existing():
    g = assign_wic_probabilities(load_edge_list(["0 1 0.9", "2 1 0.1"]))
    assert g.prob(0, 1) == 0.5


def test_candidate_fallback_rule():
    # WIC graph a->x p=1; target y has no in-edges -> global mean 1.0
    g = assign_wic_probabilities(load_edge_list(["0 1"]))
    g = Graph.from_edges(3, *g.edges()[:2], g.out_p)
    s = SeedSet.of(3, [0])
    cands = generate_candidates(g, s, "all")
    assert cands == [CandidateEdge(0, 2, 1.0)]


def test_candidate_arithmetic_mean():
    # out_avg(0) = 0.5, in_avg(3) = 0.25
    g = Graph.from_edges(4, [0, 0, 2], [1, 2, 3], [0.25, 0.75, 0.25])
    s = SeedSet.of(4, [0])
    cands = {c.v: c.p for c in generate_candidates(g, s, "all")}
    assert cands[3] == pytest.approx(0.375)


def test_candidates_exclude_existing_and_self():
    g = Graph.from_edges(3, [0], [1], [0.5])
    cands = generate_candidates(g, SeedSet.of(3, [0]), "all")
    assert [c.pair for c in cands] == [(0, 2)]


def test_candidates_need_seeds():
    g = Graph.from_edges(3, [0], [1], [0.5])
    with pytest.raises(ValueError):
        generate_candidates(g, SeedSet.of(3, []), "all")


def test_sample_mode_clamps(caplog):
    g = Graph.from_edges(4, [0], [1], [0.5])
    s = SeedSet.of(4, [0])
    cands = generate_candidates(g, s, "sample", limit=50, seed=1)
    assert len(cands) == 2
    assert "clamping" in caplog.text


def test_sample_mode_deterministic_and_distinct():
    g = Graph.from_edges(60, [0, 1], [1, 2], [0.5, 0.5])
    s = SeedSet.of(60, [0, 1, 2])
    a = generate_candidates(g, s, "sample", limit=20, seed=3)
    b = generate_candidates(g, s, "sample", limit=20, seed=3)
    assert a == b
    assert len({c.pair for c in a}) == 20
    for c in a:
        check_candidate(g, s, c)


@st.composite
def graphs_with_seeds(draw):
    n = draw(st.integers(2, 9))
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                         max_size=25))
    pairs = sorted((a, b) for a, b in pairs if a != b)
    probs = draw(st.lists(st.floats(0, 1), min_size=len(pairs), max_size=len(pairs)))
    seeds = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
    g = Graph.from_edges(n, [a for a, _ in pairs], [b for _, b in pairs], probs)
    return g, SeedSet.of(n, seeds)


@settings(max_examples=150, deadline=None)
@given(graphs_with_seeds())
def test_candidate_invariants(gs):
    g, s = gs
    cands = generate_candidates(g, s, "all")
    for c in cands:
        check_candidate(g, s, c)
    # direct count of the pool
    expect = sum(1 for u in s for v in range(g.n)
                 if v not in s and not g.has_edge(u, v))
    assert len(cands) == expect == candidate_pool_size(g, s)


@settings(max_examples=100, deadline=None)
@given(graphs_with_seeds())
def test_graph_invariants(gs):
    g, _ = gs
    fwd = sorted(zip(*[a.tolist() for a in g.edges()[:2]]))
    rev = sorted((int(u), v) for v in range(g.n) for u in g.in_neighbors(v))
    assert fwd == rev
    assert g.m == len(fwd) == len(set(fwd))
    assert all(a != b for a, b in fwd)
    w = assign_wic_probabilities(g)
    for v in range(g.n):
        lo, hi = w.in_ptr[v], w.in_ptr[v + 1]
        if hi > lo:
            assert abs(w.in_p[lo:hi].sum() - 1.0) <= 1e-12


def test_graph_arrays_immutable():
    g = Graph.from_edges(2, [0], [1], [0.5])
    with pytest.raises(ValueError):
        g.out_p[0] = 1.0


def test_seed_and_candidate_files():
    g = load_edge_list(["10 20 0.5", "20 30 0.5"])
    s = load_seeds(["# seeds", "10"], g)
    assert s.ids.tolist() == [0]
    cands = load_candidates(["10 30 0.4"], g, s)
    assert cands == [CandidateEdge(0, 2, 0.4)]
    with pytest.raises(GraphFormatError, match="already in graph"):
        load_candidates(["10 20 0.4"], g, s)
    with pytest.raises(GraphFormatError, match="not a seed"):
        load_candidates(["20 30 0.4"], g, s)
    with pytest.raises(GraphFormatError, match="unknown node"):
        load_seeds(["99"], g)


def test_top_outdegree_seeds():
    g = Graph.from_edges(4, [2, 2, 1], [0, 1, 3], [1, 1, 1])
    assert top_outdegree_seeds(g, 2).ids.tolist() == [1, 2]


def test_augmented_leaves_base_untouched():
    g = Graph.from_edges(3, [0], [1], [0.5])
    ga = g.augmented([CandidateEdge(0, 2, 0.3)])
    assert g.m == 1 and ga.m == 2
    assert ga.prob(0, 2) == 0.3
    with pytest.raises(ValueError):
        g.augmented([CandidateEdge(0, 1, 0.3)])
