"""Initial conditions for the one-dimensional sticky gravitating gas.

A system of ``n`` particles, each of mass ``1/n``, starts at rest. Three
families of starting positions are supported:

* independent-distance ("id") models: particle ``i`` sits at
  ``(X_1 + ... + X_i) / n`` where the gaps ``X_i`` are i.i.d. nonnegative
  with mean exactly 1 (the exponential special case is the Poisson model),
* the uniform model: the ascending order statistics of ``n`` independent
  uniforms on ``[0, 1]``,
* the exact rescaling that turns one Poisson draw into a uniform draw,
  together with the random time-change factor relating the two systems.

All samplers are pure functions of their parameters and a 64-bit seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ModelMismatchError, ParameterError

_MASK64 = (1 << 64) - 1

# Stream roles keep independent draws from colliding when one master seed
# fans out into many substreams.
ROLE_CONFIG = 1
ROLE_WALK = 2
ROLE_EXTRA = 3


def _splitmix64(state: int) -> int:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child seed from ``seed`` and an index path.

    Counter-based: the result depends only on the arguments, never on
    call order, so parallel replicates stay reproducible regardless of
    scheduling.
    """
    state = _splitmix64(int(seed) & _MASK64)
    for part in path:
        state = _splitmix64(state ^ (int(part) & _MASK64))
    return state


def generator(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` and an index path."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *path)))


EXPONENTIAL = "exponential"
UNIFORM_INTERVAL = "uniform_interval"
DETERMINISTIC = "deterministic"
PARETO_SHIFTED = "pareto_shifted"

_KINDS = (EXPONENTIAL, UNIFORM_INTERVAL, DETERMINISTIC, PARETO_SHIFTED)


@dataclass(frozen=True)
class IncrementModel:
    """Law of the inter-particle gaps ``X_i``, normalized to mean 1.

    ``mu`` stores the essential infimum of the law; no pair can merge
    before time ``sqrt(mu)``, so several estimators use it as a bracket.
    """

    kind: str
    params: Tuple[float, ...]
    mu: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown increment kind {self.kind!r}")
        if self.kind == EXPONENTIAL:
            if self.params or self.mu != 0.0:
                raise ParameterError("exponential gaps take no parameters and have mu = 0")
        elif self.kind == DETERMINISTIC:
            if self.params or self.mu != 1.0:
                raise ParameterError("deterministic gaps take no parameters and have mu = 1")
        elif self.kind == UNIFORM_INTERVAL:
            (a,) = self.params
            if not 0.0 <= a < 1.0:
                raise ParameterError(f"uniform gap interval [a, 2-a] needs 0 <= a < 1, got {a}")
            if self.mu != a:
                raise ParameterError("uniform-interval mu must equal the left endpoint")
        elif self.kind == PARETO_SHIFTED:
            alpha, floor = self.params
            if alpha <= 1.0:
                raise ParameterError(f"pareto tail index must exceed 1 for a finite mean, got {alpha}")
            if not 0.0 <= floor < 1.0:
                raise ParameterError(f"pareto floor must lie in [0, 1), got {floor}")
            if self.mu != floor:
                raise ParameterError("pareto mu must equal the shift floor")

    @classmethod
    def exponential(cls) -> "IncrementModel":
        """Standard exponential gaps; the Poisson model."""
        return cls(EXPONENTIAL, (), 0.0)

    @classmethod
    def uniform_interval(cls, a: float) -> "IncrementModel":
        """Gaps uniform on [a, 2-a]; mean 1, essential infimum a."""
        return cls(UNIFORM_INTERVAL, (float(a),), float(a))

    @classmethod
    def deterministic(cls) -> "IncrementModel":
        """All gaps exactly 1: the equally spaced configuration."""
        return cls(DETERMINISTIC, (), 1.0)

    @classmethod
    def pareto_shifted(cls, alpha: float, mu: float = 0.0) -> "IncrementModel":
        """Heavy-tailed gaps ``mu + Lomax(alpha, s)`` rescaled to mean 1.

        The Lomax scale is ``s = (1 - mu) * (alpha - 1)`` so the mean is
        exactly 1; moments of order >= alpha are infinite, which is the
        point: alpha selects how many moment conditions hold.
        """
        return cls(PARETO_SHIFTED, (float(alpha), float(mu)), float(mu))

    @property
    def moment_order(self) -> float:
        """Supremum of g with E X^g < infinity (inf for light tails)."""
        if self.kind == PARETO_SHIFTED:
            return self.params[0]
        return math.inf

    @property
    def is_continuous(self) -> bool:
        return self.kind != DETERMINISTIC

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` gaps. Inverse-CDF transforms throughout."""
        u = rng.random(size)
        if self.kind == EXPONENTIAL:
            return -np.log1p(-u)
        if self.kind == UNIFORM_INTERVAL:
            a = self.params[0]
            return a + (2.0 - 2.0 * a) * u
        if self.kind == DETERMINISTIC:
            return np.ones(size)
        alpha, floor = self.params
        scale = (1.0 - floor) * (alpha - 1.0)
        return floor + scale * ((1.0 - u) ** (-1.0 / alpha) - 1.0)


@dataclass(frozen=True)
class Configuration:
    """One sampled initial condition.

    ``positions[i-1]`` is the starting coordinate of particle ``i`` (1-based
    labels, ascending). For id models ``increments[m-1]`` holds the gap
    ``X_m`` actually drawn, so ``positions == cumsum(increments) / n``; the
    uniform model stores no increments and spacings are derived on demand.
    """

    n: int
    positions: np.ndarray
    increments: Optional[np.ndarray]
    model_tag: str
    seed: int

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError(f"need at least 2 particles, got {self.n}")
        if self.positions.shape != (self.n,):
            raise ParameterError("positions length must equal n")
        if np.any(np.diff(self.positions) < 0):
            raise ParameterError("positions must be nondecreasing")
        self.positions.setflags(write=False)
        if self.increments is not None:
            self.increments.setflags(write=False)

    def spacings(self) -> np.ndarray:
        """Gap vector: stored increments, or position differences times n."""
        if self.increments is not None:
            return self.increments
        return np.diff(self.positions, prepend=0.0) * self.n


def sample_id(model: IncrementModel, n: int, seed: int) -> Configuration:
    """Sample an independent-distances configuration.

    Deterministic in ``(model, n, seed)``. Exponential gaps are tagged
    ``poisson``: the positions are then the first ``n`` points of a rate-n
    Poisson process.
    """
    if n < 2:
        raise ParameterError(f"need at least 2 particles, got {n}")
    x = model.sample(generator(seed, ROLE_CONFIG), n)
    tag = "poisson" if model.kind == EXPONENTIAL else "id"
    return Configuration(n=n, positions=np.cumsum(x) / n, increments=x,
                         model_tag=tag, seed=seed)


def sample_uniform(n: int, seed: int) -> Configuration:
    """Ascending order statistics of n independent uniforms on [0, 1]."""
    if n < 2:
        raise ParameterError(f"need at least 2 particles, got {n}")
    u = generator(seed, ROLE_CONFIG).random(n)
    return Configuration(n=n, positions=np.sort(u), increments=None,
                         model_tag="uniform", seed=seed)


def couple_uniform_from_poisson(
    poisson_cfg: Configuration, extra_increment: float
) -> Tuple[Configuration, float]:
    """Rescale a Poisson draw into a uniform draw on [0, 1].

    With ``S`` the walk value one step past the last particle, the scaled
    positions ``n * x / S`` are distributed as uniform order statistics,
    and every merging time of the scaled system equals the Poisson one
    divided by ``beta = sqrt(S / n)``. Returns ``(uniform_cfg, beta)``.
    """
    if poisson_cfg.model_tag != "poisson":
        raise ModelMismatchError(
            f"coupling needs a poisson configuration, got {poisson_cfg.model_tag!r}")
    if extra_increment <= 0:
        raise ParameterError("the extra gap past the last particle must be positive")
    n = poisson_cfg.n
    s_next = poisson_cfg.positions[-1] * n + extra_increment
    beta = math.sqrt(s_next / n)
    coupled = Configuration(n=n, positions=poisson_cfg.positions * (n / s_next),
                            increments=None, model_tag="uniform",
                            seed=poisson_cfg.seed)
    return coupled, beta


def sample_coupled_pair(n: int, seed: int) -> Tuple[Configuration, Configuration, float]:
    """Draw a Poisson configuration and its coupled uniform twin.

    The Poisson member is bit-identical to ``sample_id(exponential, n,
    seed)``; the extra gap is drawn from a separate stream role of the
    same seed.
    """
    poisson = sample_id(IncrementModel.exponential(), n, seed)
    extra = float(IncrementModel.exponential().sample(generator(seed, ROLE_EXTRA), 1)[0])
    uniform, beta = couple_uniform_from_poisson(poisson, extra)
    return poisson, uniform, beta
