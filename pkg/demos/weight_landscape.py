"""How the closed-form weight responds to the regulariser balance.

alpha_s leans towards whichever regulariser is cheaper: C1 > C2 pushes it
below 1/2, and a larger barrier strength tau pulls it back to the middle.

    python demos/weight_landscape.py
"""
import numpy as np

from pstaic.weights import WeightCoeffs, solve_weight

taus = (0.01, 0.1, 1.0, 10.0)
print("C1 - C2 " + "".join(f"{'tau=' + str(t):>12}" for t in taus))
for mu in np.linspace(-20, 20, 9):
    row = [solve_weight(WeightCoeffs(max(mu, 0.0), max(-mu, 0.0), t)) for t in taus]
    print(f"{mu:7.1f} " + "".join(f"{a:12.4f}" for a in row))
