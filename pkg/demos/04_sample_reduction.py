"""
Trading samples for speed with beta
===================================

beta > 1 divides the coverage target, so roughly theta / beta RR sets are
drawn. The approximation guarantee no longer holds formally. On this
instance the chosen edges do not change.
"""

from ima.diffusion import exact_spread
from ima.instances import two_cluster
from ima.solver import SolverConfig, solve

inst = two_cluster()
# one warm-up call so compilation does not land in the first timing
solve(inst.graph, inst.seeds, inst.candidates, SolverConfig(k=1))
print("beta   theta   exact spread   sampling ms")
for beta in (1, 2, 4, 8):
    rep = solve(inst.graph, inst.seeds, inst.candidates,
                SolverConfig(k=3, beta=beta, seed=0))
    spread = exact_spread(inst.graph, rep.edges, inst.seeds)
    print(f"{beta:4}  {rep.theta:6}   {spread:12.2f}   {rep.sampling_ms:11.1f}")
