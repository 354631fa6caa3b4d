import itertools
from collections import deque

import numpy as np
import pytest

from ima.graph import CandidateEdge, Graph, SeedSet


def brute_spread(n, edges, seeds):
    """Expected reach of ``seeds`` by enumerating every edge's live/blocked
    state, pure Python. ``edges`` is a list of ``(u, v, p)``."""
    total = 0.0
    for state in itertools.product((0, 1), repeat=len(edges)):
        w = 1.0
        adj = [[] for _ in range(n)]
        for (u, v, p), live in zip(edges, state):
            w *= p if live else 1.0 - p
            if live:
                adj[u].append(v)
        if w == 0.0:
            continue
        seen = set(seeds)
        todo = deque(seeds)
        while todo:
            x = todo.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        total += w * len(seen)
    return total


def graph_edges(graph):
    src, dst, p = graph.edges()
    return [(int(a), int(b), float(q)) for a, b, q in zip(src, dst, p)]


def make_graph(n, edges):
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    p = [e[2] for e in edges]
    return Graph.from_edges(n, src, dst, p)


@pytest.fixture
def chain_half():
    """0 -> 1 -> 2, both edges p = 0.5."""
    return make_graph(3, [(0, 1, 0.5), (1, 2, 0.5)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting: one PASS/FAIL line per criterion ------------------

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome == "failed":
        prev = _criteria.get(props["criterion"])
        if prev is None or prev[0] == "PASS":
            status = "PASS" if report.outcome == "passed" else "FAIL"
            _criteria[props["criterion"]] = (status, props.get("title", ""),
                                             props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        status, title, detail = _criteria[num]
        line = f"criterion {num:2d} {status}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
