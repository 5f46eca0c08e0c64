"""Cross-checking the closed form with linear programming.

The restricted program is solved with exact rational pivots; the general
data-dependent program is solved in floating point.
"""

import numpy as np

from countdp.noise_family import MechanismConfig, build_matrix
from countdp.optimal import optimal_alphas
from countdp.oracle import audit, general_program, induced_pmfs, solve_restricted_lp
from countdp.simplex import solve_simplex

cfg = MechanismConfig(eta=0.8, D=6, epsilon=2.18)
lp = solve_restricted_lp(cfg)
closed = optimal_alphas(cfg)
print(f"LP delta = {lp.optimum:.15g}")
print(f"closed   = {closed.delta_star:.15g}")
print("alpha gap:", np.max(np.abs(lp.assignment[1:] - closed.alphas)))

# the closed-form design as a matrix of output distributions, audited directly
a = audit(build_matrix(closed.noise_pmf(), 14), cfg.epsilon)
print(f"singular {a.singular_delta:.6g} <= event {a.event_delta:.6g} <= bound {a.event_bound:.6g}")

# small example where each count may use its own noise
small = MechanismConfig(eta=0.5, D=2, epsilon=1.0)
prog = general_program(3, small)
sol = solve_simplex(prog.lp)
print(f"\ngeneral program over n = 1..3: {sol.status.value}, delta = {sol.optimum:.6f}")
m = build_matrix(induced_pmfs(prog, sol), 3)
print("p_Y(y | n), rows y = 0..5:")
print(np.round(m.probs, 4))

# below eta = 1 / (1 + 2E) the closed form leaves out a y > n comparison
low = MechanismConfig(eta=0.055, D=3, epsilon=1.05)
s = optimal_alphas(low)
got = audit(build_matrix(s.noise_pmf(), 8), low.epsilon).singular_delta
print(f"\neta={low.eta}: chain delta {s.delta_star:.4f}, audited matrix delta {got:.4f}")
