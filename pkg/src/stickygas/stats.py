"""Monte Carlo estimators for the cluster-count limit laws.

Everything here reduces to replicated draws of initial conditions pushed
through one of the engines, or to direct simulation of drifted
exponential walks. Replicates are independent work units keyed by
counter-based substreams of one master seed and reduced in replicate
order, so results are bit-identical for any thread count.

Conventions: a "model spec" is an :class:`~stickygas.model.IncrementModel`
or one of the strings ``"poisson"``, ``"uniform"``, ``"deterministic"``.
Cluster counting goes through the hull engine (fastest per draw); the
event-driven engine produces full merging-time vectors at large n.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import dynamics as _dynamics
from . import exact as _exact
from .errors import DomainError, FitError, ParameterError, WindowError
from .hull import HullProfile, cluster_count_at
from .model import (Configuration, IncrementModel, derive_seed, generator,
                    sample_coupled_pair, sample_id, sample_uniform)

ModelSpec = Union[IncrementModel, str]

# Stream roles: leading path element of every substream family.
_R_CONFIG = 1
_R_PK = 2
_R_DRIFT = 3
_R_PROD_LHS = 4
_R_PROD_RHS = 5
_R_COUPLED = 6

_MISMATCH_TOL = 1e-12


# ---------------------------------------------------------------------------
# estimate containers

@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo point estimate: sample mean, stderr, replicate count."""

    value: float
    stderr: float
    replicates: int


@dataclass(frozen=True)
class PkEstimate:
    """Probability that the integrated centered exponential walk stays
    nonnegative through step k, with binomial standard error."""

    k: int
    p_hat: float
    stderr: float
    replicates: int


@dataclass(frozen=True)
class CovEstimate:
    """Covariance of cluster counts at two times, scaled by 1/n."""

    s: float
    t: float
    value: float
    stderr: float
    replicates: int


@dataclass(frozen=True)
class EcdfEstimate:
    """Empirical CDF: right-continuous step function on sorted values."""

    values: np.ndarray
    replicates: int

    def __post_init__(self):
        self.values.setflags(write=False)

    def evaluate(self, x):
        return np.searchsorted(self.values, x, side="right") / self.replicates


def ecdf_sup_distance(a: EcdfEstimate, b: EcdfEstimate) -> float:
    """Sup-norm distance between two empirical CDFs."""
    grid = np.concatenate([a.values, b.values])
    return float(np.max(np.abs(a.evaluate(grid) - b.evaluate(grid))))


def ecdf_levy_distance(a: EcdfEstimate, b: EcdfEstimate) -> float:
    """Levy distance between two empirical CDFs.

    The vertical sup-norm is the wrong yardstick for lattice-valued
    samples whose lattice pitch varies (an atom sitting at 1/sqrt(n)
    moves with n and alone forces a sup-norm gap of its own mass); the
    Levy metric allows matching horizontal slack and measures whether
    the plotted curves are distinguishable.
    """

    def within(eps: float) -> bool:
        # F(x-eps)-eps <= G(x) <= F(x+eps)+eps for all x; each one-sided
        # violation is worst at a jump of the function being bounded.
        for f, g in ((a, b), (b, a)):
            if np.any(g.evaluate(g.values) > f.evaluate(g.values + eps) + eps):
                return False
        return True

    lo, hi = 0.0, 1.0
    while not within(hi):
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if within(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class CltReport:
    """Shape diagnostics of the standardized cluster count at one time."""

    t: float
    n: int
    replicates: int
    a_t: float
    sigma2: float
    skewness: float
    skewness_stderr: float
    excess_kurtosis: float
    kurtosis_stderr: float
    kolmogorov_stat: float
    standardized: np.ndarray


@dataclass(frozen=True)
class Fig1Report:
    """Distribution of (cluster count at the critical time) / sqrt(n)."""

    n: int
    replicates: int
    ecdf: EcdfEstimate
    mean: McEstimate
    second_moment: McEstimate
    p_single: float
    p_single_stderr: float


@dataclass(frozen=True)
class DriftFormReport:
    """Truncated stay-nonnegative probability against its closed form.

    The truncated probability upper-bounds the infinite-horizon target
    and decreases in the horizon; the quarter-horizon estimate is
    reported to display stabilization.
    """

    t: float
    k_max: int
    k_quarter: int
    target: float
    estimate: McEstimate
    estimate_quarter: McEstimate


@dataclass(frozen=True)
class ProductFormulaReport:
    """Tail of one merging time versus the product of two first-passage
    probabilities; the two Monte Carlo pipelines are each other's oracle."""

    n: int
    j: int
    t: float
    lhs: McEstimate
    rhs_value: float
    rhs_stderr: float
    p_left: float
    p_right: float
    difference: float
    joint_stderr: float


@dataclass(frozen=True)
class LastCollisionReport:
    """Per-n probability that the final merge misses 1 by more than the
    threshold; should shrink as n grows."""

    n_list: Tuple[int, ...]
    estimates: Tuple[McEstimate, ...]
    threshold: float


@dataclass(frozen=True)
class FitC1Result:
    """Power-law fit of the stay-nonnegative probabilities.

    ``c1`` comes from weighted least squares with the decay exponent
    pinned at 1/4; the free-exponent refit is a diagnostic for the decay
    rate itself.
    """

    c1: float
    c1_stderr: float
    residual_rms: float
    free_exponent: float
    free_prefactor: float
    k_values: Tuple[int, ...]


# ---------------------------------------------------------------------------
# closed-form reference values

def reference_cluster_fraction(t: float) -> float:
    """Limiting cluster fraction 1 - t^2 (Poisson and uniform models)."""
    return max(0.0, 1.0 - t * t)


def drift_form_target(t: float) -> float:
    """Infinite-horizon stay-nonnegative probability sqrt(1-t) e^(-t/2)."""
    if not 0.0 <= t < 1.0:
        raise DomainError(f"closed form defined for 0 <= t < 1, got {t}")
    return math.sqrt(1.0 - t) * math.exp(-0.5 * t)


def critical_mean_constant(c1: float = 0.36) -> float:
    """Limit of E[count / sqrt(n)] at the critical time: e c1^2 B(3/4, 3/4)."""
    beta34 = math.gamma(0.75) ** 2 / math.gamma(1.5)
    return math.e * c1 * c1 * beta34


# ---------------------------------------------------------------------------
# plumbing

def _resolve_model(spec: ModelSpec) -> Tuple[Callable[[int, int], Configuration], str]:
    if isinstance(spec, IncrementModel):
        model = spec
        return (lambda n, seed: sample_id(model, n, seed)), model.kind
    if spec == "uniform":
        return sample_uniform, "uniform"
    if spec == "poisson":
        model = IncrementModel.exponential()
        return (lambda n, seed: sample_id(model, n, seed)), "poisson"
    if spec == "deterministic":
        model = IncrementModel.deterministic()
        return (lambda n, seed: sample_id(model, n, seed)), "deterministic"
    raise ParameterError(f"unknown model spec {spec!r}")


def _closed_form_fraction(spec: ModelSpec, t: float) -> Optional[float]:
    if spec == "uniform" or spec == "poisson":
        return reference_cluster_fraction(t)
    if isinstance(spec, IncrementModel) and spec.kind == "exponential":
        return reference_cluster_fraction(t)
    return None


def _map_chunks(work, n_items: int, chunk: int, threads: int) -> list:
    spans = [(ci, s, min(s + chunk, n_items))
             for ci, s in enumerate(range(0, n_items, chunk))]
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda args: work(*args), spans))
    return [work(*args) for args in spans]


def _mc(values: np.ndarray) -> McEstimate:
    r = values.size
    sd = float(np.std(values, ddof=1)) if r > 1 else 0.0
    return McEstimate(float(np.mean(values)), sd / math.sqrt(r), r)


def _count_matrix(spec: ModelSpec, n: int, t_grid: np.ndarray, replicates: int,
                  seed: int, threads: int) -> np.ndarray:
    """(replicates, len(grid)) cluster counts via the hull engine."""
    sampler, _ = _resolve_model(spec)
    grid = np.asarray(t_grid, dtype=np.float64)

    def work(ci, a, b):
        out = np.empty((b - a, grid.size), np.int64)
        for r in range(a, b):
            cfg = sampler(n, derive_seed(seed, _R_CONFIG, r))
            prof = HullProfile.from_configuration(cfg)
            for ti in range(grid.size):
                out[r - a, ti] = cluster_count_at(prof, float(grid[ti]))
        return out

    return np.vstack(_map_chunks(work, replicates, 64, threads))


# ---------------------------------------------------------------------------
# cluster-count estimators

def estimate_a(spec: ModelSpec, n: int, t_grid: Sequence[float],
               replicates: int, seed: int, threads: int = 1) -> List[McEstimate]:
    """Mean cluster fraction count/n at each grid time, with stderr.

    For the Poisson and uniform models the estimates track 1 - t^2 on
    [0, 1]; below sqrt(essential infimum of the gaps) the fraction is 1
    exactly, with zero variance.
    """
    grid = np.asarray(t_grid, dtype=np.float64)
    counts = _count_matrix(spec, n, grid, replicates, seed, threads)
    return [_mc(counts[:, i] / n) for i in range(grid.size)]


def clt_check(spec: ModelSpec, n: int, t: float, replicates: int, seed: int,
              a_t: Optional[float] = None, threads: int = 1) -> CltReport:
    """Gaussianity diagnostics for the centered, sqrt(n)-scaled count.

    Needs t < 1 (the critical time is not Gaussian) and the limiting
    fraction a(t): closed form for Poisson/uniform, otherwise supplied by
    the caller from a pilot at larger n. Reports the fitted variance,
    skewness and excess kurtosis with normal-theory error bars, and the
    Kolmogorov distance to a centered normal with the fitted variance.
    """
    if t >= 1.0:
        raise DomainError(f"Gaussian regime requires t < 1, got {t}")
    if a_t is None:
        a_t = _closed_form_fraction(spec, t)
        if a_t is None:
            raise ParameterError(
                "no closed-form limiting fraction for this model; pass a_t")
    counts = _count_matrix(spec, n, np.array([t]), replicates, seed, threads)[:, 0]
    z = (counts - n * a_t) / math.sqrt(n)
    r = z.size
    m2 = float(np.mean((z - z.mean()) ** 2))
    if m2 > 0.0:
        zc = z - z.mean()
        skew = float(np.mean(zc ** 3)) / m2 ** 1.5
        exkurt = float(np.mean(zc ** 4)) / m2 ** 2 - 3.0
        sd = math.sqrt(m2)
        zs = np.sort(z) / sd
        cdf = 0.5 * (1.0 + np.array([math.erf(v / math.sqrt(2)) for v in zs]))
        hi = np.arange(1, r + 1) / r
        ks = float(max(np.max(hi - cdf), np.max(cdf - (hi - 1.0 / r))))
    else:
        skew = exkurt = ks = 0.0
    return CltReport(t=t, n=n, replicates=r, a_t=a_t,
                     sigma2=float(np.var(z, ddof=1)),
                     skewness=skew, skewness_stderr=math.sqrt(6.0 / r),
                     excess_kurtosis=exkurt, kurtosis_stderr=math.sqrt(24.0 / r),
                     kolmogorov_stat=ks, standardized=z)


def _jackknife_cov(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    r = x.size
    sx, sy, sxy = x.sum(), y.sum(), float(x @ y)
    full = (sxy - sx * sy / r) / (r - 1)
    loo = ((sxy - x * y) - (sx - x) * (sy - y) / (r - 1)) / (r - 2)
    se = math.sqrt((r - 1) / r * float(np.sum((loo - loo.mean()) ** 2)))
    return full, se


def estimate_R(spec: ModelSpec, n: int, pairs: Sequence[Tuple[float, float]],
               replicates: int, seed: int, threads: int = 1) -> List[CovEstimate]:
    """Covariance of counts at time pairs, per unit n, with jackknife
    stderr. Uses the same replicate's counts at both times, matching the
    limiting process covariance at fixed times."""
    grid = np.array(sorted({float(v) for st in pairs for v in st}))
    counts = _count_matrix(spec, n, grid, replicates, seed, threads).astype(np.float64)
    out = []
    for s, t in pairs:
        x = counts[:, int(np.searchsorted(grid, s))]
        y = counts[:, int(np.searchsorted(grid, t))]
        full, se = _jackknife_cov(x, y)
        out.append(CovEstimate(s=float(s), t=float(t), value=full / n,
                               stderr=se / n, replicates=replicates))
    return out


def ecdf_k1(spec: ModelSpec, n: int, replicates: int, seed: int,
            threads: int = 1) -> Fig1Report:
    """Distribution of count/sqrt(n) at the critical time t = 1."""
    counts = _count_matrix(spec, n, np.array([1.0]), replicates, seed, threads)[:, 0]
    values = counts / math.sqrt(n)
    p1 = float(np.mean(counts == 1))
    return Fig1Report(
        n=n, replicates=replicates,
        ecdf=EcdfEstimate(np.sort(values), replicates),
        mean=_mc(values),
        second_moment=_mc(values ** 2),
        p_single=p1,
        p_single_stderr=math.sqrt(p1 * (1.0 - p1) / replicates),
    )


# ---------------------------------------------------------------------------
# drifted-walk estimators

def estimate_pk(k_list: Sequence[int], replicates: int, seed: int,
                threads: int = 1) -> List[PkEstimate]:
    """Stay-nonnegative probabilities of the integrated centered
    exponential walk at each horizon k; one pass of length k per draw."""
    out = []
    for k in k_list:
        k = int(k)
        if k < 1:
            raise ParameterError(f"horizon must be at least 1, got {k}")
        chunk = max(64, min(4096, (1 << 22) // k))

        def work(ci, a, b, k=k, chunk=chunk):
            rng = generator(seed, _R_PK, k, ci)
            x = -np.log1p(-rng.random((b - a, k)))
            d = np.cumsum(np.cumsum(x - 1.0, axis=1), axis=1)
            return int(np.count_nonzero(d.min(axis=1) >= 0.0))

        hits = sum(_map_chunks(work, replicates, chunk, threads))
        p = hits / replicates
        out.append(PkEstimate(k=k, p_hat=p,
                              stderr=math.sqrt(p * (1.0 - p) / replicates),
                              replicates=replicates))
    return out


def fit_c1(estimates: Sequence[PkEstimate]) -> FitC1Result:
    """Fit p_k = c1 * k^(-1/4) by weighted least squares on log p.

    The exponent is pinned at 1/4 for the headline c1; a free-exponent
    refit is reported as a diagnostic of the decay rate. Requires at
    least 3 distinct horizons spanning a factor of 10.
    """
    ks = np.array([e.k for e in estimates], dtype=np.float64)
    ps = np.array([e.p_hat for e in estimates])
    ses = np.array([e.stderr for e in estimates])
    if np.unique(ks).size < 3:
        raise FitError("need at least 3 distinct horizons")
    if ks.max() / ks.min() < 10.0:
        raise FitError("horizons must span at least a factor of 10")
    if np.any(ps <= 0.0):
        raise FitError("cannot fit a power law through a zero estimate")
    logp = np.log(ps)
    logk = np.log(ks)
    weighted = bool(np.all(ses > 0.0))
    w = (ps / ses) ** 2 if weighted else np.ones_like(ps)

    target = logp + 0.25 * logk
    logc1 = float(np.sum(w * target) / np.sum(w))
    resid = target - logc1
    rms = math.sqrt(float(np.sum(w * resid ** 2) / np.sum(w)))
    c1 = math.exp(logc1)
    c1_se = c1 * (math.sqrt(1.0 / np.sum(w)) if weighted
                  else rms / math.sqrt(len(estimates)))

    sw = np.sum(w)
    mk = np.sum(w * logk) / sw
    mp = np.sum(w * logp) / sw
    denom = float(np.sum(w * (logk - mk) ** 2))
    if denom == 0.0:
        raise FitError("degenerate design: all horizons equal")
    slope = float(np.sum(w * (logk - mk) * (logp - mp))) / denom
    intercept = mp - slope * mk
    return FitC1Result(c1=c1, c1_stderr=c1_se, residual_rms=rms,
                       free_exponent=-slope, free_prefactor=math.exp(intercept),
                       k_values=tuple(int(e.k) for e in estimates))


def _theta_star(t: float) -> float:
    # Positive root of log(1+x) = t x; the exponential-martingale rate of
    # the drifted walk's level-crossing bound.
    lo, hi = 1e-9, 1.0
    while math.log1p(hi) - t * hi > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.log1p(mid) - t * mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _survival_steps(t: float, k_max: int, replicates: int, seed: int,
                    threads: int, retire_level: float) -> np.ndarray:
    """First step at which each replicate's integrated walk goes negative
    (a sentinel beyond k_max when it never does).

    Paths whose underlying walk climbs above ``retire_level`` are retired
    as permanent survivors: the chance such a walk ever returns below
    zero is at most exp(-theta* x level), which the default level pins
    under 1e-26, far below Monte Carlo resolution.
    """
    stage = 256
    sentinel = np.iinfo(np.int64).max

    def work(ci, a, b):
        m = b - a
        rng = generator(seed, _R_DRIFT, ci)
        w = np.zeros(m)
        d = np.zeros(m)
        death = np.full(m, sentinel, np.int64)
        active = np.arange(m)
        step = 0
        while active.size and step < k_max:
            span = min(stage, k_max - step)
            x = -np.log1p(-rng.random((active.size, span)))
            wseg = w[active, None] + np.cumsum(x - t, axis=1)
            dseg = d[active, None] + np.cumsum(wseg, axis=1)
            neg = dseg < 0.0
            died = neg.any(axis=1)
            first = np.argmax(neg, axis=1)
            death[active[died]] = step + first[died] + 1
            surv = active[~died]
            w[surv] = wseg[~died, -1]
            d[surv] = dseg[~died, -1]
            active = surv[w[surv] < retire_level]
            step += span
        return death

    return np.concatenate(_map_chunks(work, replicates, 4096, threads))


def check_drift_closed_form(t: float, k_max: int, replicates: int, seed: int,
                            threads: int = 1,
                            retire_level: Optional[float] = None) -> DriftFormReport:
    """Estimate the probability that the integrated walk with drift t
    stays nonnegative through k_max steps and compare it with the
    infinite-horizon closed form sqrt(1-t) e^(-t/2).

    The truncated probability overshoots the target from above and
    decreases in the horizon; the report carries the quarter-horizon
    estimate alongside to display stabilization.
    """
    if not 0.0 <= t < 1.0:
        raise DomainError(f"drift must lie in [0, 1), got {t}")
    if k_max < 1:
        raise ParameterError(f"horizon must be at least 1, got {k_max}")
    k_quarter = max(1, k_max // 4)
    target = drift_form_target(t)
    if t == 0.0:
        # Nonnegative increments: the walk can never dip below zero.
        one = McEstimate(1.0, 0.0, replicates)
        return DriftFormReport(t=t, k_max=k_max, k_quarter=k_quarter,
                               target=target, estimate=one, estimate_quarter=one)
    if retire_level is None:
        retire_level = 60.0 / _theta_star(t)
    death = _survival_steps(t, k_max, replicates, seed, threads, retire_level)
    return DriftFormReport(
        t=t, k_max=k_max, k_quarter=k_quarter, target=target,
        estimate=_mc((death > k_max).astype(np.float64)),
        estimate_quarter=_mc((death > k_quarter).astype(np.float64)),
    )


def _merging_time_rows(x: np.ndarray, j: int) -> np.ndarray:
    """Merging time of particle j for every row of a gap matrix.

    Vectorized restatement of :func:`stickygas.exact.merging_time`; the
    scalar version is its correctness oracle in the tests.
    """
    nb, n = x.shape
    K, L = n - j, j
    xj = x[:, j]
    right = np.zeros((nb, K))
    if K > 1:
        y = x[:, j + 1: j + K]
        ks = np.arange(2.0, K + 1.0)
        right[:, 1:] = (ks * np.cumsum(y, axis=1)
                        - np.cumsum(y * np.arange(1, K), axis=1)) / ks
    left = np.zeros((nb, L))
    if L > 1:
        z = x[:, j - L + 1: j][:, ::-1]
        ls = np.arange(2.0, L + 1.0)
        left[:, 1:] = (ls * np.cumsum(z, axis=1)
                       - np.cumsum(z * np.arange(1, L), axis=1)) / ls
    denom = np.arange(1, K + 1)[:, None] + np.arange(1, L + 1)[None, :]
    h = 2.0 * (right[:, :, None] + left[:, None, :] + xj[:, None, None]) / denom
    return np.sqrt(h.reshape(nb, -1).min(axis=1))


def _stay_nonneg_prob(drift: float, horizon: int, replicates: int, seed: int,
                      role: Tuple[int, ...], threads: int) -> Tuple[float, float]:
    def work(ci, a, b):
        rng = generator(seed, *role, ci)
        x = -np.log1p(-rng.random((b - a, horizon)))
        d = np.cumsum(np.cumsum(x - drift, axis=1), axis=1)
        return int(np.count_nonzero(d.min(axis=1) >= 0.0))

    hits = sum(_map_chunks(work, replicates, 4096, threads))
    p = hits / replicates
    return p, math.sqrt(p * (1.0 - p) / replicates)


def check_product_formula(n: int, j: int, t: float, replicates: int, seed: int,
                          model: Optional[IncrementModel] = None,
                          threads: int = 1) -> ProductFormulaReport:
    """Tail probability of one merging time versus its exact product form.

    For exponential gaps, P{T(j) >= t} equals e^(t^2) times the product
    of the probabilities that the integrated walk with drift t^2 stays
    nonnegative through j and through n-j steps. Both sides are estimated
    by independent Monte Carlo pipelines and should agree within joint
    error; the identity is exact at every n, so no finite-size allowance
    is needed.
    """
    if model is not None and model.kind != "exponential":
        raise DomainError("the product form is specific to exponential gaps")
    if not 1 <= j <= n - 1:
        raise ParameterError(f"j must lie in 1..{n - 1}, got {j}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")

    def work(ci, a, b):
        rng = generator(seed, _R_PROD_LHS, ci)
        x = -np.log1p(-rng.random((b - a, n)))
        return int(np.count_nonzero(_merging_time_rows(x, j) >= t))

    chunk = max(64, min(4096, (1 << 22) // (n * max(1, min(j, n - j)))))
    hits = sum(_map_chunks(work, replicates, chunk, threads))
    p_lhs = hits / replicates
    se_lhs = math.sqrt(p_lhs * (1.0 - p_lhs) / replicates)

    drift = t * t
    p1, se1 = _stay_nonneg_prob(drift, j, replicates, seed, (_R_PROD_RHS, 1), threads)
    p2, se2 = _stay_nonneg_prob(drift, n - j, replicates, seed, (_R_PROD_RHS, 2), threads)
    scale = math.exp(drift)
    rhs = scale * p1 * p2
    se_rhs = scale * math.sqrt((p2 * se1) ** 2 + (p1 * se2) ** 2)
    return ProductFormulaReport(
        n=n, j=j, t=t,
        lhs=McEstimate(p_lhs, se_lhs, replicates),
        rhs_value=rhs, rhs_stderr=se_rhs, p_left=p1, p_right=p2,
        difference=p_lhs - rhs,
        joint_stderr=math.sqrt(se_lhs ** 2 + se_rhs ** 2),
    )


# ---------------------------------------------------------------------------
# localization and the last collision

def localization_decay(spec: ModelSpec, n: int, j: int, M_list: Sequence[int],
                       replicates: int, seed: int,
                       threads: int = 1) -> List[McEstimate]:
    """Probability that the window-M merging time differs from the full
    one, per window radius. Windows are nested, so the estimates fall
    as M grows; comparison is exact up to 1e-12."""
    ms = [int(m) for m in M_list]
    if any(np.diff(ms) < 0):
        raise ParameterError("window radii must be ascending")
    if ms[0] < 1 or ms[-1] > min(j, n - j):
        raise WindowError(
            f"window radii must lie in 1..{min(j, n - j)} for j = {j}, n = {n}")
    sampler, _ = _resolve_model(spec)

    def work(ci, a, b):
        out = np.empty((b - a, len(ms)), np.float64)
        for r in range(a, b):
            cfg = sampler(n, derive_seed(seed, _R_CONFIG, r))
            grid = _exact._h_grid(cfg.spacings(), j)
            full = math.sqrt(grid.min())
            boxed = np.minimum.accumulate(
                np.minimum.accumulate(grid, axis=0), axis=1)
            for mi, m in enumerate(ms):
                windowed = math.sqrt(boxed[m - 1, m - 1])
                out[r - a, mi] = 1.0 if windowed - full > _MISMATCH_TOL else 0.0
        return out

    flags = np.vstack(_map_chunks(work, replicates, 16, threads))
    return [_mc(flags[:, mi]) for mi in range(len(ms))]


def last_collision_convergence(spec: ModelSpec, n_list: Sequence[int],
                               replicates: int, seed: int,
                               threshold: float = 0.1,
                               threads: int = 1) -> LastCollisionReport:
    """Probability that the final merge time misses 1 by more than the
    threshold, for each system size, via the event-driven engine."""
    sampler, _ = _resolve_model(spec)
    if isinstance(spec, IncrementModel) and spec.moment_order <= 2.0:
        raise ParameterError(
            "last-collision concentration needs a finite second moment")
    estimates = []
    for ni, n in enumerate(n_list):
        def work(ci, a, b, ni=ni, n=n):
            out = np.empty(b - a)
            for r in range(a, b):
                cfg = sampler(n, derive_seed(seed, _R_CONFIG, ni, r))
                log = _dynamics.simulate(cfg)
                out[r - a] = 1.0 if abs(log.times[-1] - 1.0) > threshold else 0.0
            return out

        flags = np.concatenate(_map_chunks(work, replicates, 8, threads))
        estimates.append(_mc(flags))
    return LastCollisionReport(n_list=tuple(int(v) for v in n_list),
                               estimates=tuple(estimates), threshold=threshold)


# ---------------------------------------------------------------------------
# coupled-pair identities

def coupled_count_discrepancies(n: int, t_grid: Sequence[float],
                                replicates: int, seed: int) -> int:
    """Number of grid points, over all replicates, where the uniform
    member's cluster count differs from the Poisson member's count at the
    rescaled time. The coupling makes this identity exact, so any nonzero
    return flags a bug."""
    grid = np.asarray(t_grid, dtype=np.float64)
    bad = 0
    for r in range(replicates):
        poisson, uniform, beta = sample_coupled_pair(n, derive_seed(seed, _R_COUPLED, r))
        pp = HullProfile.from_configuration(poisson)
        pu = HullProfile.from_configuration(uniform)
        for t in grid:
            if cluster_count_at(pu, float(t)) != cluster_count_at(pp, float(beta * t)):
                bad += 1
    return bad
