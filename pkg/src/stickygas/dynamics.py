"""Event-driven physics engine for the sticky gas.

Between collisions every cluster follows its own parabola: constant
acceleration equal to the total mass on its right minus the total mass on
its left. Adjacent clusters attract with relative acceleration
``-(m_left + m_right)``, so each candidate collision is the root of a
quadratic. A priority queue with lazy invalidation drives the run in
O(n log n): merging one pair leaves every other cluster's trajectory
untouched, so stale predictions are simply version-stamped and dropped
when popped.

Merges conserve mass and momentum. All kinematics are kept in absolute
time against each cluster's own last-event state, never time-stepped, so
positions carry no accumulated integration error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from numba import njit

from .errors import ConsistencyError, ParameterError
from .exact import MergingTimes
from .model import Configuration


@dataclass(frozen=True)
class Cluster:
    """A merged block of consecutive particles moving as one body.

    ``span`` holds 1-based first and last particle labels; mass is
    span length over n.
    """

    span: Tuple[int, int]
    mass: float
    position: float
    velocity: float
    acceleration: float


class Event(NamedTuple):
    time: float
    left_span: Tuple[int, int]
    right_span: Tuple[int, int]
    merged: Cluster


@njit(cache=True, nogil=True, inline="always")
def _hit_time(tL, xL, vL, aL, tR, xR, vR, aR, tnow):
    # Gap polynomial in absolute time; leading coefficient is
    # -(m_left + m_right)/2 < 0, so a future root always exists while the
    # gap is nonnegative. Stable quadratic formula avoids cancellation.
    c2 = 0.5 * aR - 0.5 * aL
    c1 = (vR - aR * tR) - (vL - aL * tL)
    c0 = (xR - vR * tR + 0.5 * aR * tR * tR) - (xL - vL * tL + 0.5 * aL * tL * tL)
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc <= 0.0:
        th = -c1 / (2.0 * c2)
    else:
        sq = np.sqrt(disc)
        q = -0.5 * (c1 + sq) if c1 >= 0.0 else -0.5 * (c1 - sq)
        r1 = q / c2
        r2 = c0 / q if q != 0.0 else r1
        th = r1 if r1 > r2 else r2
    if th < tnow:
        th = tnow
    return th


@njit(cache=True, nogil=True, inline="always")
def _heap_push(ht, ha, hb, hva, hvb, size, t, a, b, va, vb):
    i = size
    ht[i] = t
    ha[i] = a
    hb[i] = b
    hva[i] = va
    hvb[i] = vb
    while i > 0:
        p = (i - 1) >> 1
        if ht[p] <= ht[i]:
            break
        ht[p], ht[i] = ht[i], ht[p]
        ha[p], ha[i] = ha[i], ha[p]
        hb[p], hb[i] = hb[i], hb[p]
        hva[p], hva[i] = hva[i], hva[p]
        hvb[p], hvb[i] = hvb[i], hvb[p]
        i = p
    return size + 1


@njit(cache=True, nogil=True, inline="always")
def _heap_pop(ht, ha, hb, hva, hvb, size):
    last = size - 1
    ht[0], ht[last] = ht[last], ht[0]
    ha[0], ha[last] = ha[last], ha[0]
    hb[0], hb[last] = hb[last], hb[0]
    hva[0], hva[last] = hva[last], hva[0]
    hvb[0], hvb[last] = hvb[last], hvb[0]
    i = 0
    while True:
        lc = 2 * i + 1
        if lc >= last:
            break
        rc = lc + 1
        c = lc
        if rc < last and ht[rc] < ht[lc]:
            c = rc
        if ht[i] <= ht[c]:
            break
        ht[i], ht[c] = ht[c], ht[i]
        ha[i], ha[c] = ha[c], ha[i]
        hb[i], hb[c] = hb[c], hb[i]
        hva[i], hva[c] = hva[c], hva[i]
        hvb[i], hvb[c] = hvb[c], hvb[i]
        i = c
    return last


@njit(cache=True, nogil=True)
def _simulate_events(pos):
    n = pos.shape[0]
    # Live clusters are addressed by the 0-based index of their first
    # particle; merging keeps the left slot and bumps both versions.
    last = np.arange(n)
    nxt = np.arange(1, n + 1)
    prv = np.arange(-1, n - 1)
    ver = np.zeros(n, np.int64)
    tr = np.zeros(n)
    xr = pos.copy()
    vr = np.zeros(n)
    ac = np.empty(n)
    for i in range(n):
        ac[i] = (n - 1.0 - 2.0 * i) / n

    cap = 3 * n + 8
    ht = np.empty(cap)
    ha = np.empty(cap, np.int64)
    hb = np.empty(cap, np.int64)
    hva = np.empty(cap, np.int64)
    hvb = np.empty(cap, np.int64)
    size = 0
    for i in range(n - 1):
        th = _hit_time(tr[i], xr[i], vr[i], ac[i],
                       tr[i + 1], xr[i + 1], vr[i + 1], ac[i + 1], 0.0)
        size = _heap_push(ht, ha, hb, hva, hvb, size, th, i, i + 1, 0, 0)

    ev_t = np.empty(n - 1)
    ev_lf = np.empty(n - 1, np.int64)
    ev_ll = np.empty(n - 1, np.int64)
    ev_rf = np.empty(n - 1, np.int64)
    ev_rl = np.empty(n - 1, np.int64)
    ev_x = np.empty(n - 1)
    ev_v = np.empty(n - 1)

    nev = 0
    while nev < n - 1:
        t = ht[0]
        a = ha[0]
        b = hb[0]
        va = hva[0]
        vb = hvb[0]
        size = _heap_pop(ht, ha, hb, hva, hvb, size)
        if ver[a] != va or ver[b] != vb:
            continue

        dta = t - tr[a]
        xa = xr[a] + vr[a] * dta + 0.5 * ac[a] * dta * dta
        va_now = vr[a] + ac[a] * dta
        dtb = t - tr[b]
        xb = xr[b] + vr[b] * dtb + 0.5 * ac[b] * dtb * dtb
        vb_now = vr[b] + ac[b] * dtb
        ma = last[a] - a + 1.0
        mb = last[b] - b + 1.0
        xn = (ma * xa + mb * xb) / (ma + mb)
        vn = (ma * va_now + mb * vb_now) / (ma + mb)

        ev_t[nev] = t
        ev_lf[nev] = a + 1
        ev_ll[nev] = last[a] + 1
        ev_rf[nev] = b + 1
        ev_rl[nev] = last[b] + 1
        ev_x[nev] = xn
        ev_v[nev] = vn
        nev += 1

        last[a] = last[b]
        ver[a] += 1
        ver[b] += 1
        nb = nxt[b]
        nxt[a] = nb
        if nb < n:
            prv[nb] = a
        tr[a] = t
        xr[a] = xn
        vr[a] = vn
        ac[a] = (n - 1.0 - last[a] - a) / n

        pa = prv[a]
        if pa >= 0:
            th = _hit_time(tr[pa], xr[pa], vr[pa], ac[pa], t, xn, vn, ac[a], t)
            size = _heap_push(ht, ha, hb, hva, hvb, size, th, pa, a, ver[pa], ver[a])
        if nb < n:
            th = _hit_time(t, xn, vn, ac[a], tr[nb], xr[nb], vr[nb], ac[nb], t)
            size = _heap_push(ht, ha, hb, hva, hvb, size, th, a, nb, ver[a], ver[nb])

    return ev_t, ev_lf, ev_ll, ev_rf, ev_rl, ev_x, ev_v


@dataclass(frozen=True)
class EventLog:
    """Complete collision history of one run: n-1 merges in time order.

    Simultaneous k-fold collisions appear as k-1 zero-gap events at equal
    times. Particle labels in the span arrays are 1-based.
    """

    n: int
    times: np.ndarray
    left_first: np.ndarray
    left_last: np.ndarray
    right_first: np.ndarray
    right_last: np.ndarray
    merged_position: np.ndarray
    merged_velocity: np.ndarray
    final_cluster: Cluster

    def events(self) -> List[Event]:
        n = self.n
        out = []
        for i in range(n - 1):
            first = int(self.left_first[i])
            last = int(self.right_last[i])
            merged = Cluster(
                span=(first, last),
                mass=(last - first + 1) / n,
                position=float(self.merged_position[i]),
                velocity=float(self.merged_velocity[i]),
                acceleration=((n - last) - (first - 1)) / n,
            )
            out.append(Event(
                time=float(self.times[i]),
                left_span=(first, int(self.left_last[i])),
                right_span=(int(self.right_first[i]), last),
                merged=merged,
            ))
        return out

    def to_csv(self, path) -> None:
        """Debugging dump; column layout is documented but not frozen."""
        with open(path, "w") as fh:
            fh.write("time,left_first,left_last,right_first,right_last\n")
            for i in range(self.n - 1):
                fh.write(f"{self.times[i]:.17g},{self.left_first[i]},"
                         f"{self.left_last[i]},{self.right_first[i]},"
                         f"{self.right_last[i]}\n")


def simulate(cfg: Configuration) -> EventLog:
    """Run the sticky dynamics to the final single cluster.

    Positions must be sorted; equal positions are legal (the pair merges
    at time zero) but are meant for stress tests, not production draws.
    """
    pos = np.ascontiguousarray(cfg.positions, dtype=np.float64)
    ev_t, ev_lf, ev_ll, ev_rf, ev_rl, ev_x, ev_v = _simulate_events(pos)
    n = cfg.n
    final = Cluster(span=(1, n), mass=1.0, position=float(ev_x[-1]),
                    velocity=float(ev_v[-1]), acceleration=0.0)
    return EventLog(n=n, times=ev_t, left_first=ev_lf, left_last=ev_ll,
                    right_first=ev_rf, right_last=ev_rl,
                    merged_position=ev_x, merged_velocity=ev_v,
                    final_cluster=final)


def merging_times_from_log(log: EventLog) -> MergingTimes:
    """First co-clustering time of each adjacent pair.

    Adjacent clusters merge along their shared boundary, so the pair
    ``(j, j+1)`` first shares a cluster at the event whose left span ends
    at ``j``; each boundary appears exactly once in a complete log.
    """
    n = log.n
    if log.times.shape[0] != n - 1:
        raise ConsistencyError(
            f"log holds {log.times.shape[0]} events, expected {n - 1}")
    boundary = log.left_last
    seen = np.zeros(n - 1, dtype=bool)
    seen[boundary - 1] = True
    if not seen.all():
        raise ConsistencyError("log does not cover every adjacent pair")
    times = np.empty(n - 1)
    times[boundary - 1] = log.times
    return MergingTimes(values=times, n=n)


def state_at(log: EventLog, cfg: Configuration, t: float) -> List[Cluster]:
    """Cluster partition and kinematics at time t, replayed from the log.

    An event at exactly time t has already happened, matching the strict
    inequality used by the cluster count. Events are admitted up to the
    engine's time resolution of 1e-12 past t: a simultaneous cascade is
    recorded at equal times only up to root-solving rounding.
    """
    if t < 0:
        raise ParameterError(f"time must be nonnegative, got {t}")
    t_cut = t + 1e-12
    n = cfg.n
    last = np.arange(n)
    alive = np.ones(n, dtype=bool)
    tr = np.zeros(n)
    xr = np.array(cfg.positions, dtype=np.float64)
    vr = np.zeros(n)
    for i in range(n - 1):
        te = log.times[i]
        if te > t_cut:
            break
        a = int(log.left_first[i]) - 1
        b = int(log.right_first[i]) - 1
        dta = te - tr[a]
        aa = (n - 1.0 - last[a] - a) / n
        xa = xr[a] + vr[a] * dta + 0.5 * aa * dta * dta
        va = vr[a] + aa * dta
        dtb = te - tr[b]
        ab = (n - 1.0 - last[b] - b) / n
        xb = xr[b] + vr[b] * dtb + 0.5 * ab * dtb * dtb
        vb = vr[b] + ab * dtb
        ma = last[a] - a + 1.0
        mb = last[b] - b + 1.0
        xr[a] = (ma * xa + mb * xb) / (ma + mb)
        vr[a] = (ma * va + mb * vb) / (ma + mb)
        tr[a] = te
        last[a] = last[b]
        alive[b] = False
    out = []
    for a in np.nonzero(alive)[0]:
        dt = t - tr[a]
        acc = (n - 1.0 - last[a] - a) / n
        out.append(Cluster(
            span=(int(a) + 1, int(last[a]) + 1),
            mass=(last[a] - a + 1) / n,
            position=float(xr[a] + vr[a] * dt + 0.5 * acc * dt * dt),
            velocity=float(vr[a] + acc * dt),
            acceleration=float(acc),
        ))
    return out


def verify_conservation(cfg: Configuration, log: EventLog,
                        times: np.ndarray | None = None) -> Tuple[float, float]:
    """Max |total momentum| and barycenter drift over a set of probe times.

    Both are exact zeros of the dynamics; anything beyond rounding noise
    flags an engine bug. Defaults to probing every event boundary plus
    a point after the last merge.
    """
    if times is None:
        times = np.concatenate([log.times, [log.times[-1] + 1.0]])
    bary0 = float(np.mean(cfg.positions))
    worst_p = 0.0
    worst_b = 0.0
    for t in times:
        clusters = state_at(log, cfg, float(t))
        mom = sum(c.mass * c.velocity for c in clusters)
        bary = sum(c.mass * c.position for c in clusters)
        worst_p = max(worst_p, abs(mom))
        worst_b = max(worst_b, abs(bary - bary0))
    return worst_p, worst_b
