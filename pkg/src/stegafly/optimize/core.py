"""Shared optimizer types: configuration, candidate solutions, traces.

Positions are kept as ``numpy`` arrays; a population is an ``(n, d)`` array
of positions plus an ``(n,)`` array of raw objective values.  Orientation
decides what "better" means, every comparison goes through it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ConfigError, ShapeError

Objective = Callable[[np.ndarray], float]


class Orientation(enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    def better(self, a: float, b: float) -> bool:
        """True when ``a`` is strictly better than ``b``."""
        return a > b if self is Orientation.MAXIMIZE else a < b

    def not_worse(self, a: float, b: float) -> bool:
        return a >= b if self is Orientation.MAXIMIZE else a <= b

    def brightness(self, fitness):
        """Map fitness to a higher-is-better score (firefly light intensity)."""
        return fitness if self is Orientation.MAXIMIZE else -fitness

    def best_index(self, fitness: np.ndarray) -> int:
        return int(np.argmax(fitness) if self is Orientation.MAXIMIZE else np.argmin(fitness))

    def worst_index(self, fitness: np.ndarray) -> int:
        return int(np.argmin(fitness) if self is Orientation.MAXIMIZE else np.argmax(fitness))

    def rank(self, fitness: np.ndarray) -> np.ndarray:
        """Indices sorted best first (stable)."""
        return np.argsort(-self.brightness(np.asarray(fitness)), kind="stable")


class StepDistribution(enum.Enum):
    LEVY = "levy"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass
class SolutionVector:
    """One candidate: a bounded position with its cached objective value."""

    position: np.ndarray
    fitness: float = math.nan
    generation: int = 0

    @property
    def valid(self) -> bool:
        return not math.isnan(self.fitness)


@dataclass
class FireflyParams:
    """Firefly dynamics parameters.

    ``gamma=None`` means "derive from the bounds" as ``1 / S**2`` with ``S``
    the mean bound width; see :func:`default_gamma`.
    """

    beta0_scale: float = 2.0
    gamma: float | None = None
    eta0: float = 0.2
    eta_decay: float = 0.95
    step_distribution: StepDistribution = StepDistribution.LEVY

    def __post_init__(self):
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma}")
        if self.eta0 < 0:
            raise ConfigError(f"eta0 must be >= 0, got {self.eta0}")
        if not 0 < self.eta_decay <= 1:
            raise ConfigError(f"eta_decay must be in (0, 1], got {self.eta_decay}")
        if self.beta0_scale < 0:
            raise ConfigError(f"beta0_scale must be >= 0, got {self.beta0_scale}")
        self.step_distribution = StepDistribution(self.step_distribution)

    def eta(self, iteration: int) -> float:
        """Randomization weight at ``iteration`` (0-based)."""
        return self.eta0 * self.eta_decay**iteration


@dataclass
class DeParams:
    f_scale: float = 0.5
    crossover_rate: float = 0.9

    def __post_init__(self):
        if not 0 <= self.f_scale <= 2:
            raise ConfigError(f"f_scale must be in [0, 2], got {self.f_scale}")
        if not 0 <= self.crossover_rate <= 1:
            raise ConfigError(f"crossover_rate must be in [0, 1], got {self.crossover_rate}")


@dataclass
class HfaConfig:
    """Run configuration shared by the FA, DE and hybrid drivers.

    ``init_seed``, when given, seeds only the initial population so that
    different algorithms can start from the same individuals while their
    operator streams stay independent.
    """

    dimension: int
    bounds: Sequence[Sequence[float]]
    population_size: int = 40
    max_iterations: int = 2000
    rng_seed: int | None = None
    firefly: FireflyParams = field(default_factory=FireflyParams)
    de: DeParams = field(default_factory=DeParams)
    orientation: Orientation = Orientation.MINIMIZE
    init_seed: int | None = None

    def __post_init__(self):
        self.orientation = Orientation(self.orientation)
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim == 1 and b.shape == (2,):
            b = np.tile(b, (self.dimension, 1))
        if b.shape != (self.dimension, 2):
            raise ConfigError(
                f"bounds must have shape ({self.dimension}, 2), got {b.shape}"
            )
        if not np.all(np.isfinite(b)) or np.any(b[:, 1] < b[:, 0]):
            raise ConfigError("every bound must be finite with lower <= upper")
        self.bounds = b
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1")
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigError(
                f"population_size must be even and >= 4, got {self.population_size}"
            )
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")

    @property
    def lower(self) -> np.ndarray:
        return self.bounds[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.bounds[:, 1]

    @property
    def gamma(self) -> float:
        if self.firefly.gamma is not None:
            return self.firefly.gamma
        return default_gamma(self.bounds)


@dataclass
class OptimizationTrace:
    """Outcome of one optimizer run.

    ``best_per_iteration[k]`` is the global best after iteration ``k``;
    ``initial_best`` is the best of the initial population.
    """

    best_per_iteration: list[float]
    best_solution: SolutionVector
    evaluations: int
    initial_best: float

    @property
    def final_best(self) -> float:
        return self.best_per_iteration[-1]


def default_gamma(bounds: np.ndarray) -> float:
    """Light absorption ``1/S**2`` where ``S`` is the mean bound width."""
    widths = np.asarray(bounds, dtype=float)[:, 1] - np.asarray(bounds, dtype=float)[:, 0]
    s = float(np.mean(widths))
    if s <= 0:
        raise ConfigError("cannot derive gamma from zero-width bounds")
    return 1.0 / (s * s)


def clamp(x: np.ndarray, bounds: np.ndarray | None) -> np.ndarray:
    """Hard-clamp ``x`` into ``bounds`` (an ``(d, 2)`` array); no-op for ``None``."""
    if bounds is None:
        return x
    return np.minimum(np.maximum(x, bounds[:, 0]), bounds[:, 1])


def euclidean_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return math.sqrt(float(np.dot(diff, diff)))


class CountingObjective:
    """Wraps an objective, counting calls and coercing results to float."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.calls = 0

    def __call__(self, x: np.ndarray) -> float:
        self.calls += 1
        return float(self.objective(x))
