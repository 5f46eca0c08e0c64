"""Against a discrete Gaussian with the same variance.

Both noises have the same spread, but the bounded design puts its mass
where the privacy constraints want it.
"""

import numpy as np

from countdp.gaussian import compare_mechanisms, discrete_gaussian_pmf, gaussian_delta
from countdp.noise_family import build_matrix
from countdp.optimal import solve
from countdp.oracle import smallest_epsilon

sol = solve(0.8, 6, 2.18)
g = discrete_gaussian_pmf(sol.variance)
ours = sol.noise_pmf()
print(f"sigma^2 = {sol.variance:.6f}")
print(" z   ours       gaussian")
for z in range(0, 4):
    print(f"{z:2d}  {ours[z]:.6f}   {g[z]:.6f}")
print(f"Gaussian mass outside [-6:6]: {g.tail_mass_outside(6):.3e}")

# smallest epsilon each noise needs for the same delta
target = sol.delta_star
eps_g = smallest_epsilon(lambda e: gaussian_delta(e, sol.variance, g), target)
eps_o = smallest_epsilon(build_matrix(ours, 14), target * (1 + 1e-12))
print(f"\nfor delta = {target:.4g}: ours needs eps = {eps_o:.3f}, Gaussian needs {eps_g:.3f}")

print("\neta = 0.5, D = 6")
for r in compare_mechanisms(0.5, 6, np.linspace(0.8, 3.0, 12)):
    mark = "ours" if r.our_dp_delta < r.gaussian_delta else "gaussian"
    print(f"eps={r.epsilon:4.2f}  ours={r.our_dp_delta:9.3e}  gaussian={r.gaussian_delta:9.3e}  better: {mark}")
