"""How the all-events delta falls with epsilon and moves with eta.

The knee sits near epsilon = ln(1 + C): once e^eps - 1 passes C, the
binding bound jumps from a short chain to the full-support one.
"""

import math

import numpy as np

from countdp.optimal import solve

eps_grid = np.linspace(0.5, 3.0, 11)
print("eta = 0.5")
print("eps    " + "  ".join(f"D={D:<8d}" for D in (4, 6, 8)))
for eps in eps_grid:
    row = [solve(0.5, D, float(eps)).dp_delta for D in (4, 6, 8)]
    print(f"{eps:4.2f}  " + "  ".join(f"{v:10.3e}" for v in row))
print(f"knee for eta = 0.5: ln(1 + C) = ln 3 = {math.log(3):.4f}")

print("\neps = 2.2, D = 8")
for eta in (0.5, 0.6, 0.7, 0.8, 0.9):
    sol = solve(eta, 8, 2.2)
    print(f"eta={eta:.1f}  regime={sol.regime:2d}  (2D+1) delta={sol.dp_delta:.3e}")
