"""Classic differential evolution (DE/rand/1/bin) operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigError, ShapeError
from .core import DeParams, Orientation, SolutionVector, clamp


@dataclass(frozen=True)
class DeEvent:
    """Record of one mutation/crossover/selection step, for auditing runs."""

    target: int
    donors: tuple[int, int, int]
    forced_index: int
    mask: np.ndarray
    mutant: np.ndarray
    target_position: np.ndarray
    trial: np.ndarray
    accepted: bool


def pick_donors(n: int, target_index: int, rng: np.random.Generator) -> tuple[int, int, int]:
    """Three distinct indices in ``[0, n)``, all different from ``target_index``."""
    if n < 4:
        raise ConfigError(f"DE mutation needs a population of at least 4, got {n}")
    candidates = np.delete(np.arange(n), target_index)
    r1, r2, r3 = rng.choice(candidates, size=3, replace=False)
    return int(r1), int(r2), int(r3)


def de_mutate(
    population: np.ndarray,
    target_index: int,
    f_scale: float,
    rng: np.random.Generator,
    bounds: np.ndarray | None = None,
) -> np.ndarray:
    """``x_r1 + F * (x_r2 - x_r3)`` with donors distinct from the target."""
    population = np.asarray(population, dtype=float)
    r1, r2, r3 = pick_donors(population.shape[0], target_index, rng)
    return _mutant(population, (r1, r2, r3), f_scale, bounds)


def _mutant(population, donors, f_scale, bounds):
    r1, r2, r3 = donors
    return clamp(population[r1] + f_scale * (population[r2] - population[r3]), bounds)


def _crossover_mask(d: int, crossover_rate: float, rng: np.random.Generator):
    forced = int(rng.integers(d))
    mask = rng.random(d) <= crossover_rate
    mask[forced] = True
    return mask, forced


def de_crossover(mutant, target, crossover_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Binomial crossover; the forced index always takes the mutant component."""
    mutant = np.asarray(mutant, dtype=float)
    target = np.asarray(target, dtype=float)
    if mutant.shape != target.shape:
        raise ShapeError(f"dimension mismatch: {mutant.shape} vs {target.shape}")
    mask, _ = _crossover_mask(mutant.shape[0], crossover_rate, rng)
    return np.where(mask, mutant, target)


def de_select(trial: SolutionVector, target: SolutionVector, orientation: Orientation) -> SolutionVector:
    """Greedy selection; ties go to the trial."""
    return trial if orientation.not_worse(trial.fitness, target.fitness) else target


def de_generation(
    pool: np.ndarray,
    pool_fitness: np.ndarray,
    members,
    objective,
    rng: np.random.Generator,
    *,
    params: DeParams,
    bounds: np.ndarray | None,
    orientation: Orientation,
    generation: int = 0,
    recorder: Callable[[DeEvent], None] | None = None,
):
    """Advance ``pool[members]`` by one DE generation.

    Donors come from the whole ``pool``, which is treated as the frozen
    generation-``g`` snapshot and is not modified.  Returns
    ``(positions, fitness, evaluations)`` for the members, in order.
    """
    members = list(members)
    new_pos = pool[members].copy()
    new_fit = pool_fitness[members].copy()
    d = pool.shape[1]
    for k, i in enumerate(members):
        donors = pick_donors(pool.shape[0], i, rng)
        mutant = _mutant(pool, donors, params.f_scale, bounds)
        mask, forced = _crossover_mask(d, params.crossover_rate, rng)
        trial_pos = np.where(mask, mutant, pool[i])
        trial = SolutionVector(trial_pos, objective(trial_pos), generation + 1)
        target = SolutionVector(pool[i], float(pool_fitness[i]), generation)
        chosen = de_select(trial, target, orientation)
        if recorder is not None:
            recorder(DeEvent(i, donors, forced, mask, mutant, pool[i].copy(), trial_pos,
                             chosen is trial))
        new_pos[k] = chosen.position
        new_fit[k] = chosen.fitness
    return new_pos, new_fit, len(members)
