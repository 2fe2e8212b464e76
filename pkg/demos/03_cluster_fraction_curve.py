"""The cluster fraction follows 1 - t^2 until the critical time.

For Poisson (and uniform) starting positions the number of clusters per
particle, K_n(t)/n, converges to a(t) = 1 - t^2 on [0, 1] and to 0 past
the critical time t = 1. With gaps bounded away from zero the curve also
has a flat start: a(t) = 1 below the square root of the minimal gap.
"""

from stickygas.model import IncrementModel
from stickygas.stats import estimate_a, reference_cluster_fraction

n, reps, seed = 4000, 400, 7
grid = [0.05 * k for k in range(22)]

print(f"Poisson model, n = {n}, {reps} replicates")
print("   t     K/n estimate   stderr      1 - t^2")
for t, est in zip(grid, estimate_a("poisson", n, grid, reps, seed, threads=4)):
    print(f"  {t:4.2f}   {est.value:.5f}      {est.stderr:.5f}   "
          f"{reference_cluster_fraction(t):.4f}")

# A gap law with essential infimum 0.5: nothing can merge before
# sqrt(0.5) = 0.707, so the curve is pinned at 1 there (zero variance).
model = IncrementModel.uniform_interval(0.5)
ests = estimate_a(model, n, [0.4, 0.6, 0.8, 1.1], reps, seed + 1, threads=4)
print("\ngaps uniform on [0.5, 1.5]:")
for t, est in zip([0.4, 0.6, 0.8, 1.1], ests):
    print(f"  K/n at t = {t}: {est.value:.5f} +- {est.stderr:.5f}")
