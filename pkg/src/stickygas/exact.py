"""Closed-form merging times via the barycenter minimization.

For particle ``j`` (1-based) the first time it shares a cluster with
particle ``j+1`` is

    T(j) = min over k in 1..n-j, l in 1..j of sqrt(H(k, j, l)),

where ``H(p, j, q)`` is a weighted average of the gaps spanned by the
block of ``p`` particles to the right of the boundary and ``q`` particles
to the left:

    H(p, j, q) = 2/(p+q) * ( (1/p) * sum_{i=1..p-1} (p-i) X_{j+i+1}
                           + (1/q) * sum_{i=1..q-1} (q-i) X_{j-i+1}
                           + X_{j+1} ).

The coefficient masses sum to one, so H is a convex combination of gaps;
hence sqrt(mu) <= T(j) <= sqrt(X_{j+1}) always.

Index convention (used everywhere in this package): particles carry
1-based labels ``1..n``; gaps are stored 0-based with ``x[m-1]`` holding
``X_m``. In array terms H(p, j, q) reads slots ``j-q+1 .. j+p-1`` plus
slot ``j``; slot 0 (= X_1, the offset of the first particle) is never
used by any merging time.

This module is the O(n^2)-per-particle oracle against which the physics
engine (:mod:`stickygas.dynamics`) and the fast counting path
(:mod:`stickygas.hull`) are verified. It is intended for n up to a few
hundred.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, WindowError
from .model import Configuration

_ORACLE_SOFT_CAP = 512
_ORACLE_HARD_CAP = 4096


@dataclass(frozen=True)
class MergingTimes:
    """Vector of first sticking times: ``values[j-1]`` is T(j), j = 1..n-1."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        if self.values.shape != (self.n - 1,):
            raise ParameterError("need exactly n-1 merging times")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.n - 1


@dataclass(frozen=True)
class WindowedTime:
    """Merging-time minimum restricted to blocks of at most M on each side."""

    j: int
    M: int
    value: float


class MergingTime(NamedTuple):
    """A merging time with its minimizing block extents.

    The new cluster born at this time consists of particles
    ``j - l + 1 .. j + k``.
    """

    time: float
    k: int
    l: int


def h_value(p: int, j: int, q: int, increments: np.ndarray) -> float:
    """Weighted gap average H(p, j, q); see the module docstring.

    ``increments`` is the 0-based gap vector. Raises IndexError when the
    needed slots ``j-q+1 .. j+p-1`` (plus ``j``) fall outside it.
    """
    if p < 1 or q < 1:
        raise ParameterError("block extents must be at least 1")
    n = increments.shape[0]
    if j < 1 or j + p - 1 > n - 1 or j - q + 1 < 1:
        raise IndexError(
            f"H({p}, {j}, {q}) needs gap slots {j - q + 1}..{j + p - 1} "
            f"of an array with valid slots 1..{n - 1}")
    right = sum((p - i) * increments[j + i] for i in range(1, p)) / p
    left = sum((q - i) * increments[j - i] for i in range(1, q)) / q
    return 2.0 * (right + left + increments[j]) / (p + q)


def f_value(p: int, j: int, q: int, s: float, increments: np.ndarray) -> float:
    """Barycenter gap polynomial: positive before contact, zero at it.

    Equals ``(p+q)/2 * (H(p,j,q) - s^2)``; kept as an independent route
    for cross-checking ``sqrt(H)`` at the root.
    """
    h = h_value(p, j, q, increments)
    return 0.5 * (p + q) * (h - s * s)


def _h_grid(increments: np.ndarray, j: int, kmax: int = 0, lmax: int = 0) -> np.ndarray:
    """All H(k, j, l) for k = 1..kmax, l = 1..lmax as a (kmax, lmax) grid.

    Defaults cover the full feasible range k <= n-j, l <= j. Built from
    prefix sums, O(kmax * lmax).
    """
    n = increments.shape[0]
    K = kmax if kmax else n - j
    L = lmax if lmax else j
    xj = increments[j]

    right = np.zeros(K)
    if K > 1:
        y = increments[j + 1: j + K]
        ks = np.arange(2.0, K + 1.0)
        right[1:] = (ks * np.cumsum(y) - np.cumsum(y * np.arange(1, K))) / ks
    left = np.zeros(L)
    if L > 1:
        z = increments[j - L + 1: j][::-1]
        ls = np.arange(2.0, L + 1.0)
        left[1:] = (ls * np.cumsum(z) - np.cumsum(z * np.arange(1, L))) / ls

    denom = np.arange(1, K + 1)[:, None] + np.arange(1, L + 1)[None, :]
    return 2.0 * (right[:, None] + left[None, :] + xj) / denom


def merging_time(cfg: Configuration, j: int) -> MergingTime:
    """Exact merging time of particle ``j`` with its right neighbor.

    Minimizes sqrt(H) over all feasible block extents; ties resolve to
    the lexicographically smallest ``(k, l)`` so the reported newborn
    cluster is reproducible.
    """
    if not 1 <= j <= cfg.n - 1:
        raise IndexError(f"j must lie in 1..{cfg.n - 1}, got {j}")
    grid = _h_grid(cfg.spacings(), j)
    flat = int(np.argmin(grid))
    k, l = divmod(flat, grid.shape[1])
    return MergingTime(float(np.sqrt(grid[k, l])), k + 1, l + 1)


def all_merging_times(cfg: Configuration) -> MergingTimes:
    """Merging times of every adjacent pair; the O(n^3) oracle.

    Refuses n above 4096 and warns above 512: use the event-driven engine
    or hull bisection for production-size systems.
    """
    n = cfg.n
    if n > _ORACLE_HARD_CAP:
        raise ParameterError(
            f"the cubic oracle is capped at n = {_ORACLE_HARD_CAP}; "
            "use dynamics.simulate or hull.merging_time_bisect instead")
    if n > _ORACLE_SOFT_CAP:
        warnings.warn(
            f"all_merging_times is O(n^3); n = {n} exceeds the intended "
            f"oracle scale of {_ORACLE_SOFT_CAP}", stacklevel=2)
    x = cfg.spacings()
    out = np.empty(n - 1)
    for j in range(1, n):
        out[j - 1] = _h_grid(x, j).min()
    return MergingTimes(values=np.sqrt(out), n=n)


def windowed_time(cfg: Configuration, j: int, M: int) -> WindowedTime:
    """Merging-time minimum over block extents capped at M on each side.

    Requires ``M <= min(j, n - j)`` so every gap the window reads exists
    in the configuration; no out-of-range gaps are fabricated. The value
    is nonincreasing in M and upper-bounds the unrestricted time.
    """
    if not 1 <= j <= cfg.n - 1:
        raise IndexError(f"j must lie in 1..{cfg.n - 1}, got {j}")
    feasible = min(j, cfg.n - j)
    if not 1 <= M <= feasible:
        raise WindowError(
            f"window radius {M} outside 1..{feasible} for j = {j}, n = {cfg.n}")
    grid = _h_grid(cfg.spacings(), j, kmax=M, lmax=M)
    return WindowedTime(j=j, M=M, value=float(np.sqrt(grid.min())))


def count_clusters(times: MergingTimes, t: float) -> int:
    """Number of clusters at time t: one plus the pairs still unmerged.

    A pair counts as unmerged only while ``t`` is strictly below its
    merging time, so a pair merging exactly at ``t`` has already merged.
    """
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    return 1 + int(np.count_nonzero(times.values > t))


def last_collision(times: MergingTimes) -> float:
    """Time of the final merge, after which a single cluster remains."""
    return float(times.values.max())
