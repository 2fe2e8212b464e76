"""The equally spaced gas collapses all at once.

With particles at 1/n, 2/n, ..., 1 every block-pair average H equals 1,
so every merging time is exactly 1: nothing happens before t = 1, then
the whole line sticks together in a single simultaneous cascade. This is
the golden case every engine must reproduce exactly.
"""

import numpy as np

from stickygas import dynamics, exact, hull
from stickygas.model import IncrementModel, sample_id

cfg = sample_id(IncrementModel.deterministic(), 8, 0)
print("positions:", cfg.positions)

times = exact.all_merging_times(cfg)
print("merging times (exact engine):", times.values)
assert np.all(times.values == 1.0), "bitwise 1.0, no tolerance needed"

log = dynamics.simulate(cfg)
print("\nevent log (time, left span, right span):")
for ev in log.events():
    print(f"  t = {ev.time:.15f}  {ev.left_span} + {ev.right_span}"
          f" -> {ev.merged.span}")

profile = hull.HullProfile.from_configuration(cfg)
print("\ncluster count staircase:")
for t in (0.0, 0.5, 0.99, 0.999999, 1.0, 1.5):
    print(f"  K({t}) = {hull.cluster_count_at(profile, t)}")

# After the collapse the single cluster rests at the conserved barycenter.
final = dynamics.state_at(log, cfg, 2.0)[0]
print(f"\nfinal cluster: span {final.span}, position {final.position:.6f} "
      f"(barycenter {np.mean(cfg.positions):.6f}), velocity {final.velocity:+.2e}")
