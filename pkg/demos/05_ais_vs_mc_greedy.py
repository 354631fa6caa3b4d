"""
Sampling-based selection against simulation-based greedy
========================================================

MC-Greedy fixes r live-edge worlds and runs lazy greedy on the average
reach. Each gain evaluation walks every world, so its cost grows with r
and with the number of candidates re-evaluated. The RR-based solver does
one sampling pass, sized by (eps, delta), and then only counts.
"""

import time

from ima.baselines import mc_greedy
from ima.experiment import evaluate_solution
from ima.graph import generate_candidates
from ima.instances import erdos_renyi
from ima.solver import SolverConfig, solve

inst = erdos_renyi(n=400, p_edge=0.01, seed=7, n_seeds=5)
g, seeds = inst.graph, inst.seeds
cands = generate_candidates(g, seeds, "sample", limit=300, seed=7)
print(f"{g.n} nodes, {g.m} edges, {len(cands)} candidates")

# warm up the compiled kernels so the timings compare steady-state work
solve(g, seeds, cands[:2], SolverConfig(k=1))
mc_greedy(g, seeds, cands[:2], 1, r=10)

t0 = time.perf_counter()
ais = solve(g, seeds, cands, SolverConfig(k=10, eps=0.3, delta=0.01, seed=0)).edges
t_ais = time.perf_counter() - t0

t0 = time.perf_counter()
mcg = mc_greedy(g, seeds, cands, 10, r=2000, seed=0)
t_mc = time.perf_counter() - t0

# score both with an independent evaluation stream
before = evaluate_solution(g, [], seeds, seed=99)
print(f"\nno edges    spread {before.value:7.2f} +/- {before.half_width:.2f}")
for name, edges, t in (("AIS", ais, t_ais), ("MC-Greedy", mcg, t_mc)):
    est = evaluate_solution(g, edges, seeds, seed=99)
    print(f"{name:<11} spread {est.value:7.2f} +/- {est.half_width:.2f}   {t:6.2f}s")
