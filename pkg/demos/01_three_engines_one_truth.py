"""Three independent routes to the same merging times.

A sticky gas of n particles (mass 1/n each, at rest, attraction equal to
the product of masses) admits three ways to compute when particle j first
shares a cluster with particle j+1:

  * exact   -- minimize the block-pair collision formula over all block
               extents: T(j) = min sqrt(H(k, j, l)),
  * dynamics -- actually run the event-driven physics,
  * hull    -- bisect the "already merged at t" predicate, which is a
               slope test on a lower convex hull.

They must agree to within root-solving noise, and they do.
"""

import numpy as np

from stickygas import dynamics, exact, hull
from stickygas.model import IncrementModel, sample_id

n, seed = 24, 2024
cfg = sample_id(IncrementModel.exponential(), n, seed)
print(f"Poisson configuration: n = {n}, seed = {seed}")
print(f"first positions: {np.round(cfg.positions[:5], 4)} ...\n")

t_exact = exact.all_merging_times(cfg)
t_dyn = dynamics.merging_times_from_log(dynamics.simulate(cfg))
profile = hull.HullProfile.from_configuration(cfg)
t_hull = np.array([hull.merging_time_bisect(profile, j, 1e-10)
                   for j in range(1, n)])

print(" j   exact          dynamics       hull bisect")
for j in (1, 5, 12, 18, n - 1):
    print(f"{j:2d}   {t_exact.values[j-1]:.12f} {t_dyn.values[j-1]:.12f} "
          f"{t_hull[j-1]:.12f}")

print(f"\nmax |exact - dynamics| = {np.max(np.abs(t_exact.values - t_dyn.values)):.2e}")
print(f"max |exact - hull|     = {np.max(np.abs(t_exact.values - t_hull)):.2e}")

# The minimizer also names the newborn cluster: extents (k, l) around j
# mean particles j-l+1 .. j+k merge at T(j).
j = 12
mt = exact.merging_time(cfg, j)
print(f"\nat T({j}) = {mt.time:.6f} a cluster of particles "
      f"{j - mt.l + 1}..{j + mt.k} is born")

# Counting clusters agrees exactly with the merge-count identity.
times = t_exact
for t in (0.3, 0.6, 0.9, 1.2):
    assert hull.cluster_count_at(profile, t) == exact.count_clusters(times, t)
print("\ncluster counts from the hull match the direct merge count exactly")
