# # Neighbor weights on the simplex
#
# Every imputed cell averages a set of rows. The weights trade off two
# things: rows that are close should count more, but spreading mass over
# many rows averages away noise. That trade-off is a small quadratic
# program on the probability simplex with an exact, sort-based solution.

import numpy as np

from awnn import qp_oracle, solve_weights, weight_adjuster

# Five candidate rows with their (debiased) distances to the target row.

distances = [(0, 0.10), (1, 0.12), (2, 0.30), (3, 0.90), (4, 2.50)]

# A small regularizer means "trust the distances": only the nearest rows
# survive. A large one pushes towards a plain average.

for reg in (0.01, 0.1, 1.0, 10.0):
    sol = solve_weights(distances, reg)
    w = ", ".join(f"{x:.3f}" for x in sol.as_array(5))
    print(f"reg={reg:<5} K={sol.k}  weights=[{w}]")

# The proximity set is always a prefix of the rows sorted by distance, and
# the weights are affine in the distance on that prefix.

sol = solve_weights(distances, 0.1)
print("proximity set:", sol.proximity_set)

# Under the hood this is a water-filling level: shift the scores down by
# ``u`` and clip at zero so that exactly one unit of mass remains.

a = np.array([0.7, 0.4, 0.2, -0.3])
u = weight_adjuster(a)
print("level u =", u, " clipped mass =", np.maximum(a - u, 0).sum())

# A slow projected-gradient solver reaches the same answer, which is how
# the closed form is checked in the test suite.

gap = np.abs(solve_weights(distances, 0.1).as_array(5) - qp_oracle(distances, 0.1).as_array(5)).max()
print(f"closed form vs projected gradient: {gap:.1e}")
