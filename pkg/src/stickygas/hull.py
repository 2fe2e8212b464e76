"""Cluster counting through a lower convex hull, O(n) per time point.

Divide the barycenter gap identity through by the block sizes and the
merge condition for particle j at time t turns into a slope comparison on

    phi_i = C_i - t^2 * i^2 / (2n),   i = 0..n,

where C_i is the prefix sum of the sorted initial positions: particle j
has merged with j+1 by time t exactly when some chord arriving at j from
the left has slope >= some chord leaving j to the right, i.e. when j is
NOT a strict vertex of the lower convex hull of {(i, phi_i)}. The cluster
count is therefore 1 + (number of strict interior hull vertices).

This reduction is an implementation step, not a given: it is validated
against the direct minimization of :mod:`stickygas.exact` on hundreds of
random configurations before anything else trusts it (see the test
suite). Ties count as merged, matching the attained-root convention of
the exact engine; slope comparisons use cross products with a relative
epsilon of 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConsistencyError, ParameterError
from .model import Configuration

_REL_EPS = 1e-12


@dataclass(frozen=True)
class HullProfile:
    """Prefix sums C_0..C_n of one configuration's sorted positions."""

    n: int
    prefix: np.ndarray

    def __post_init__(self):
        if self.prefix.shape != (self.n + 1,):
            raise ParameterError("prefix must hold n+1 values, starting at 0")
        self.prefix.setflags(write=False)

    @classmethod
    def from_positions(cls, positions: np.ndarray) -> "HullProfile":
        n = positions.shape[0]
        prefix = np.empty(n + 1)
        prefix[0] = 0.0
        np.cumsum(positions, out=prefix[1:])
        return cls(n=n, prefix=prefix)

    @classmethod
    def from_configuration(cls, cfg: Configuration) -> "HullProfile":
        return cls.from_positions(np.asarray(cfg.positions, dtype=np.float64))

    def spacing(self, j: int) -> float:
        """Gap X_{j+1} between particles j and j+1, recovered from C."""
        c = self.prefix
        return self.n * (c[j + 1] - 2.0 * c[j] + c[j - 1])


@njit(cache=True, nogil=True)
def _strict_interior_vertices(prefix, w, rel_eps):
    # Monotone chain over already-sorted integer abscissas. Popping on
    # cross <= tol removes both off-hull and collinear points, so the
    # survivors between the endpoints are exactly the strict vertices.
    m = prefix.shape[0]
    stack = np.empty(m, np.int64)
    top = 0
    for i in range(m):
        yi = prefix[i] - w * i * i
        while top >= 2:
            o = stack[top - 2]
            a = stack[top - 1]
            yo = prefix[o] - w * o * o
            ya = prefix[a] - w * a * a
            t1 = (a - o) * (yi - yo)
            t2 = (ya - yo) * (i - o)
            if t1 - t2 <= rel_eps * (abs(t1) + abs(t2)):
                top -= 1
            else:
                break
        stack[top] = i
        top += 1
    return top - 2


def cluster_count_at(profile: HullProfile, t: float) -> int:
    """Number of clusters at time t; agrees exactly with the merge count
    over the full merging-time vector, ties resolved as merged."""
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    w = t * t / (2.0 * profile.n)
    return 1 + int(_strict_interior_vertices(profile.prefix, w, _REL_EPS))


def cluster_count_curve(profile: HullProfile, t_grid: np.ndarray) -> np.ndarray:
    """Cluster counts over an ascending time grid; nonincreasing."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if np.any(np.diff(t_grid) < 0):
        raise ParameterError("time grid must be ascending")
    return np.array([cluster_count_at(profile, float(t)) for t in t_grid],
                    dtype=np.int64)


def _critical_chords(profile: HullProfile, j: int, t: float, eps: float):
    # Strict-vertex test local to index j: compare the steepest incoming
    # chord with the shallowest outgoing one. Returns the merged flag and
    # the extremal chord endpoints.
    c = profile.prefix
    n = profile.n
    w = t * t / (2.0 * n)
    idx = np.arange(n + 1)
    phi = c - w * idx * idx
    lhs = (phi[j] - phi[:j]) / (j - idx[:j])
    rhs = (phi[j + 1:] - phi[j]) / (idx[j + 1:] - j)
    li = int(np.argmax(lhs))
    ri = j + 1 + int(np.argmin(rhs))
    max_in = lhs[li]
    min_out = rhs[ri - j - 1]
    merged = max_in >= min_out - eps * (abs(max_in) + abs(min_out))
    return merged, li, ri


def _merged_at(profile: HullProfile, j: int, t: float, eps: float = 0.0) -> bool:
    # Bisection queries use the raw comparison: the bisected root is
    # almost surely tie-free, and the collinearity slack would shift the
    # membership flip away from the root by more than the cross-engine
    # agreement allows. Tie semantics stay with the counting kernel.
    return _critical_chords(profile, j, t, eps)[0]


def merging_time_bisect(profile: HullProfile, j: int, tol: float,
                        mu: float = 0.0) -> float:
    """Merging time of particle j to within tol, by bisecting the merged
    predicate over the bracket [sqrt(mu), sqrt(X_{j+1})].

    The bracket is guaranteed by the convex-combination bounds of the
    exact engine; a violated bracket reports an internal inconsistency
    rather than a bad input.
    """
    if not 1 <= j <= profile.n - 1:
        raise IndexError(f"j must lie in 1..{profile.n - 1}, got {j}")
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    lo = float(np.sqrt(max(mu, 0.0)))
    hi = float(np.sqrt(max(profile.spacing(j), 0.0)))
    if lo > hi * (1.0 + 1e-9):
        raise ParameterError(
            f"support floor {mu} exceeds the boundary gap at j = {j}")
    hi = max(hi, lo)
    if _merged_at(profile, j, lo):
        return lo
    if not _merged_at(profile, j, hi):
        # Allow a whisker of rounding slack on the theoretical endpoint.
        widened = hi * (1.0 + 1e-9) + 1e-300
        if not _merged_at(profile, j, widened):
            raise ConsistencyError(
                f"merge bracket [{lo}, {hi}] failed for j = {j}: "
                "the slope test disagrees with the convex-combination bound")
        hi = widened
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _merged_at(profile, j, mid):
            hi = mid
        else:
            lo = mid
    # The chords that meet first are pinned down once the bracket is
    # tight; their crossing time has a closed form, so polish the answer
    # to full precision instead of returning the bracket midpoint.
    _, li, ri = _critical_chords(profile, j, hi, 0.0)
    c = profile.prefix
    gap = (c[ri] - c[j]) / (ri - j) - (c[j] - c[li]) / (j - li)
    if gap > 0.0:
        t_pair = float(np.sqrt(2.0 * profile.n * gap / (ri - li)))
        if lo - tol <= t_pair <= hi + tol:
            return t_pair
    return 0.5 * (lo + hi)
