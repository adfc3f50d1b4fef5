"""Firefly, differential evolution and hybrid optimizers."""

from .core import (
    DeParams,
    FireflyParams,
    HfaConfig,
    OptimizationTrace,
    Orientation,
    SolutionVector,
    StepDistribution,
    clamp,
    default_gamma,
    euclidean_distance,
)
from .de import DeEvent, de_crossover, de_generation, de_mutate, de_select, pick_donors
from .firefly import attractiveness, fa_iteration, firefly_move, levy_step, random_step
from .hybrid import ALGORITHMS, de_run, fa_run, hfa_run, initial_population, round_robin_split

__all__ = [
    "ALGORITHMS",
    "DeEvent",
    "DeParams",
    "FireflyParams",
    "HfaConfig",
    "OptimizationTrace",
    "Orientation",
    "SolutionVector",
    "StepDistribution",
    "attractiveness",
    "clamp",
    "de_crossover",
    "de_generation",
    "de_mutate",
    "de_run",
    "de_select",
    "default_gamma",
    "euclidean_distance",
    "fa_iteration",
    "fa_run",
    "firefly_move",
    "hfa_run",
    "initial_population",
    "levy_step",
    "pick_donors",
    "random_step",
    "round_robin_split",
]
