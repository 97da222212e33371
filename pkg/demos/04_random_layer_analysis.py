"""
Why low-degree layers should come first
=======================================

If two layers connect to their columns at random, the number of shared
columns is hypergeometric and the expected stall of the transition decays
like a power of the code length whose exponent grows with the degree of the
second layer. Ordering layers by ascending degree therefore stalls less.
"""

import numpy as np

from qcsched.analysis import (
    RandomLayerModel,
    asymptotic_slope,
    expected_idle_matrix,
    expected_pair_idle_exact,
    sample_pair_idle,
    verify_prop1,
)

# exact expectation as a fraction, and a Monte Carlo check
model = RandomLayerModel(n_cols=10, d_i=2, d_j=3, t=3)
mean, se = sample_pair_idle(model, 200_000, seed=0)
print("exact", expected_pair_idle_exact(model), "sampled", round(mean, 4), "+-", round(se, 4))

# decay with N: the fitted exponent approaches -(d_j + 1 - t)
grid = [50, 100, 200, 400, 800, 1600, 3200]
for d_i, d_j, t in [(3, 4, 2), (4, 4, 4), (6, 4, 3)]:
    print(f"d_i={d_i} d_j={d_j} t={t}: slope {asymptotic_slope(d_i, d_j, t, grid):.3f}, "
          f"predicted {-(d_j + 1 - t)}")

# the expected stall table is lopsided: entering a high-degree layer is cheap
np.set_printoptions(precision=4, suppress=True)
print("expected idle, rows = from degree, cols = to degree (3, 6), N=200, t=3")
print(expected_idle_matrix([3, 6], 200, 3))

# ascending, random and descending orders on random codes
cmp = verify_prop1([3, 3, 6, 6], n_cols=200, t=3, codes=100_000, seed=0)
for name in ("ascending", "random", "descending"):
    print(f"{name:>10}: {cmp.means[name]:.4f} +- {cmp.stderrs[name]:.4f}")
print(cmp.pass_flags)
