"""Optimal bounded noise for one configuration, step by step.

eta = 0.8 of releases are exact, the noise never exceeds 6 in either
direction, and we want the best delta at epsilon = 2.18.
"""

import numpy as np

from countdp.noise_family import MechanismConfig
from countdp.optimal import bound_set, optimal_alphas

cfg = MechanismConfig(eta=0.8, D=6, epsilon=2.18)
print(f"E = e^eps = {cfg.E:.4f}   C = 2 eta / (1 - eta) = {cfg.C:g}")

# every candidate lower bound on delta, and the crossovers that decide which wins
bs = bound_set(cfg)
# C_{D+1} = 0 is a sentinel closing the last interval
for k, (b, c) in enumerate(zip(bs.bounds, bs.crossovers[1:]), start=1):
    print(f"  k={k}  delta_k={b: .6f}  C_k={c:.4f}")

sol = optimal_alphas(cfg)
print(f"\nregime k* = {sol.regime}, delta = {sol.delta_star:.6f}")
print("alpha* =", np.round(sol.alphas, 6))

# the pmf is symmetric, so z >= 0 tells the whole story
pmf = sol.noise_pmf()
for z in range(0, cfg.D + 1):
    print(f"  p(z={z}) = {pmf[z]:.6f}")
print(f"variance = {sol.variance:.6f}")
print(f"all-events guarantee: ({cfg.epsilon}, {sol.dp_delta:.4f})-DP")
