import itertools
import json

import numpy as np
import pytest

from ima.baselines import outdeg_select
from ima.diffusion import exact_spread
from ima.experiment import (ConfigError, ExperimentConfig, collection_estimate,
                            evaluate_solution, format_csv, run_experiment,
                            solve_collection, sweep)
from ima.graph import CandidateEdge, load_edge_list
from ima.instances import gen_instance, random_small_instance, two_cluster
from ima.solver import SolverConfig

from conftest import make_graph


@pytest.fixture
def cluster_files(tmp_path):
    return two_cluster().write(tmp_path / "inst")


def config_for(paths, **kw):
    kw.setdefault("k", 3)
    kw.setdefault("eps", 0.3)
    kw.setdefault("delta", 0.1)
    return ExperimentConfig(graph=paths["graph"], seeds=paths["seeds"],
                            candidates=paths["candidates"], **kw)


def test_evaluate_deterministic_chain():
    g = make_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert evaluate_solution(g, [], [0], 0.1, 0.1).value == 3.0


def test_evaluate_all_seeded():
    g = make_graph(4, [(0, 1, 0.3)])
    assert evaluate_solution(g, [], [0, 1, 2, 3], 0.1, 0.1).value == 4.0


def test_evaluate_eps_delta_guarantee():
    rng = np.random.default_rng(77)
    inst = random_small_instance(rng)
    A = inst.candidates[:2]
    exact = exact_spread(inst.graph, A, inst.seeds)
    eps, delta = 0.1, 0.05
    ok = sum(abs(evaluate_solution(inst.graph, A, inst.seeds, eps, delta, seed=s).value
                 - exact) <= eps * exact for s in range(500))
    assert ok >= (1 - delta) * 500


def test_evaluate_rejects_bad_params():
    with pytest.raises(ConfigError):
        evaluate_solution(make_graph(2, []), [], [0], 1.5, 0.1)


def test_evaluate_agrees_with_solver_initial_estimate():
    inst = two_cluster()
    cfg = SolverConfig(eps=0.3, delta=0.1, k=3, seed=4)
    coll = solve_collection(inst.graph, inst.seeds, len(inst.candidates), cfg)
    a = collection_estimate(coll)
    b = evaluate_solution(inst.graph, [], inst.seeds, 0.05, 0.01, seed=4)
    assert abs(a.value - b.value) <= a.half_width + b.half_width


def test_rand_report_is_deterministic(cluster_files):
    cfg = config_for(cluster_files, method="RAND", seed=3)
    assert run_experiment(cfg).to_json() == run_experiment(cfg).to_json()


def test_ais_improves_spread(cluster_files):
    rep = run_experiment(config_for(cluster_files, method="AIS"))
    assert rep.spread_after["value"] > rep.spread_before["value"]
    doc = json.loads(rep.to_json())
    assert doc["schema"] == 1
    assert 1 <= doc["spread_after"]["value"] <= doc["n"]
    assert "timings_ms" not in doc


def test_timings_are_opt_in(cluster_files):
    rep = run_experiment(config_for(cluster_files, method="PROB", timings=True))
    assert {"selection", "evaluation", "load"} <= set(rep.to_dict()["timings_ms"])


def test_report_uses_original_labels(tmp_path):
    (tmp_path / "g.txt").write_text("100 200 0.5\n200 300 0.5\n")
    (tmp_path / "s.txt").write_text("100\n")
    cfg = ExperimentConfig(graph=str(tmp_path / "g.txt"), seeds=str(tmp_path / "s.txt"),
                           k=1, eps=0.3, delta=0.1)
    rep = run_experiment(cfg)
    assert rep.seeds == [100]
    assert rep.edges[0][:2] == [100, 300]


def test_sweep_non_decreasing_in_k(cluster_files):
    cfg = config_for(cluster_files)
    rows = sweep(cfg, [1, 2, 3, 4, 5], ["AIS"])
    inst = two_cluster()
    exact = []
    for k in range(1, 6):
        rep = run_experiment(config_for(cluster_files, k=k))
        edges = [CandidateEdge(u, v, p) for u, v, p in rep.edges]
        exact.append(exact_spread(inst.graph, edges, inst.seeds))
    assert all(b >= a - 1e-9 for a, b in zip(exact, exact[1:]))
    est = [r["spread_after"] for r in rows]
    assert all(b >= a for a, b in zip(est, est[1:]))
    text = format_csv(rows)
    assert text.splitlines()[0].startswith("method,k,")
    assert len(text.splitlines()) == 6


def test_sweep_repeats_and_median(cluster_files):
    rows = sweep(config_for(cluster_files, method="RAND"), [2], repeats=3,
                 aggregate="median")
    assert rows[0]["repeat"] == 3
    with pytest.raises(ConfigError):
        sweep(config_for(cluster_files), [1], aggregate="mode")


def test_config_validation(cluster_files):
    with pytest.raises(ConfigError):
        run_experiment(config_for(cluster_files, method="NOPE"))
    with pytest.raises(ConfigError):
        run_experiment(config_for(cluster_files, eps=0))


def test_generated_candidates_and_seed_strategy(tmp_path):
    inst = gen_instance("erdos_renyi", {"n": 12, "p_edge": 0.25}, seed=2)
    paths = inst.write(tmp_path)
    cfg = ExperimentConfig(graph=paths["graph"], seed_strategy="top_outdeg:2",
                           candidate_mode="sample", candidate_limit=5, k=2,
                           eps=0.3, delta=0.1, method="OUTDEG")
    rep = run_experiment(cfg)
    assert len(rep.seeds) == 2 and len(rep.edges) == 2


def test_gen_path():
    inst = gen_instance("path", {"n": 3})
    assert [(int(a), int(b)) for a, b, _ in zip(*inst.graph.edges())] == [(0, 1), (1, 2)]


def test_gen_erdos_renyi_reproducible(tmp_path):
    a = gen_instance("erdos_renyi", {"n": 10, "p_edge": 0.2}, seed=7).write(tmp_path / "a")
    b = gen_instance("erdos_renyi", {"n": 10, "p_edge": 0.2}, seed=7).write(tmp_path / "b")
    for key in a:
        assert open(a[key]).read() == open(b[key]).read()


def test_gen_star_and_unknown_kind():
    inst = gen_instance("star", {"n": 5})
    assert inst.graph.out_degree()[0] == 4
    with pytest.raises(ValueError):
        gen_instance("torus")


def test_two_cluster_opt_bridges_and_outdeg_loses():
    inst = two_cluster()
    g, s, C = inst.graph, inst.seeds, inst.candidates
    best = max(itertools.combinations(C, 3), key=lambda A: exact_spread(g, A, s))
    heads = {c.v for c in C if g.out_degree()[c.v] == 3}
    assert {c.v for c in best} == heads
    assert exact_spread(g, outdeg_select(g, C, 3), s) < exact_spread(g, best, s)


def test_written_instance_loads_back(tmp_path):
    paths = two_cluster().write(tmp_path)
    g = load_edge_list(paths["graph"])
    assert g.m == two_cluster().graph.m
