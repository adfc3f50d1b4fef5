"""Run drivers: pure firefly, pure DE, and the hybrid of the two.

The hybrid keeps one population split into two equal groups.  Each
iteration the first group takes a firefly sweep and the second a DE
generation, independently and optionally on two threads; then the global
best is refreshed (and re-inserted if the sweep lost it), the groups are
merged and re-split at random.

Every random decision comes from a stream spawned off the run seed, one
per role (initialization, firefly group, DE group, re-split), so running
the two groups concurrently cannot change the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .core import HfaConfig, Objective, OptimizationTrace, SolutionVector, clamp
from .de import DeEvent, de_generation
from .firefly import fa_iteration


def _streams(config: HfaConfig) -> dict[str, np.random.Generator]:
    init_ss, fa_ss, de_ss, split_ss = np.random.SeedSequence(config.rng_seed).spawn(4)
    if config.init_seed is not None:
        init_ss = np.random.SeedSequence(config.init_seed)
    return {
        "init": np.random.default_rng(init_ss),
        "fa": np.random.default_rng(fa_ss),
        "de": np.random.default_rng(de_ss),
        "split": np.random.default_rng(split_ss),
    }


def initial_population(
    config: HfaConfig,
    rng: np.random.Generator,
    initial: Sequence[Sequence[float]] | None = None,
) -> np.ndarray:
    """Uniform random positions within bounds; ``initial`` rows replace the first ones."""
    n, d = config.population_size, config.dimension
    pos = config.lower + rng.random((n, d)) * (config.upper - config.lower)
    if initial is not None:
        seeds = np.atleast_2d(np.asarray(initial, dtype=float))
        if seeds.shape[1] != d or seeds.shape[0] > n:
            raise ValueError(f"initial candidates must have shape (<= {n}, {d})")
        pos[: seeds.shape[0]] = clamp(seeds, config.bounds)
    return pos


class _BestTracker:
    def __init__(self, orientation):
        self.orientation = orientation
        self.position = None
        self.fitness = None
        self.generation = 0

    def update(self, positions, fitness, generation):
        i = self.orientation.best_index(fitness)
        if self.fitness is None or self.orientation.better(fitness[i], self.fitness):
            self.position = positions[i].copy()
            self.fitness = float(fitness[i])
            self.generation = generation

    def solution(self) -> SolutionVector:
        return SolutionVector(self.position.copy(), self.fitness, self.generation)


def round_robin_split(fitness: np.ndarray, orientation) -> tuple[np.ndarray, np.ndarray]:
    """Rank best-first and deal alternately into two equal groups."""
    ranked = orientation.rank(fitness)
    return ranked[0::2], ranked[1::2]


def _evaluate_all(objective, positions) -> np.ndarray:
    return np.array([objective(p) for p in positions], dtype=float)


def _start(config, objective, initial):
    streams = _streams(config)
    pos = initial_population(config, streams["init"], initial)
    fit = _evaluate_all(objective, pos)
    tracker = _BestTracker(config.orientation)
    tracker.update(pos, fit, 0)
    return streams, pos, fit, tracker


def hfa_run(
    config: HfaConfig,
    objective: Objective,
    *,
    initial: Sequence[Sequence[float]] | None = None,
    workers: int = 1,
    recorder: Callable[[DeEvent], None] | None = None,
) -> OptimizationTrace:
    """Hybrid firefly / differential evolution run.

    Parameters
    ----------
    config : HfaConfig
        Population size, bounds, iteration budget, seed and operator params.
    objective : callable
        Pure function of an in-bounds position vector.
    initial : array-like, optional
        Candidates injected into the initial population (first rows).
    workers : int
        ``>= 2`` evolves the two groups on separate threads.  The result is
        identical either way.
    recorder : callable, optional
        Receives a :class:`DeEvent` for every DE step.

    Returns
    -------
    OptimizationTrace
    """
    orient = config.orientation
    gamma = config.gamma
    n = config.population_size
    half = n // 2
    streams, pos, fit, tracker = _start(config, objective, initial)
    evaluations = n
    initial_best = tracker.fitness

    g1, g2 = round_robin_split(fit, orient)

    executor = ThreadPoolExecutor(max_workers=2) if workers > 1 else None
    history: list[float] = []
    try:
        for k in range(config.max_iterations):
            pool, pool_fit = pos.copy(), fit.copy()

            def fa_group(g1=g1, pool=pool, pool_fit=pool_fit, k=k):
                p, f = pool[g1].copy(), pool_fit[g1].copy()
                ev = fa_iteration(
                    p, f, objective, streams["fa"],
                    params=config.firefly, gamma=gamma, iteration=k,
                    bounds=config.bounds, orientation=orient,
                )
                return p, f, ev

            def de_group(g2=g2, pool=pool, pool_fit=pool_fit, k=k):
                return de_generation(
                    pool, pool_fit, g2, objective, streams["de"],
                    params=config.de, bounds=config.bounds, orientation=orient,
                    generation=k, recorder=recorder,
                )

            if executor is not None:
                fa_future = executor.submit(fa_group)
                de_future = executor.submit(de_group)
                p1, f1, e1 = fa_future.result()
                p2, f2, e2 = de_future.result()
            else:
                p1, f1, e1 = fa_group()
                p2, f2, e2 = de_group()
            evaluations += e1 + e2

            pos = np.concatenate([p1, p2])
            fit = np.concatenate([f1, f2])
            tracker.update(pos, fit, k + 1)
            # keep the global best in the population
            if orient.better(tracker.fitness, fit[orient.best_index(fit)]):
                w = orient.worst_index(fit)
                pos[w] = tracker.position
                fit[w] = tracker.fitness
            history.append(tracker.fitness)

            perm = streams["split"].permutation(n)
            g1, g2 = perm[:half], perm[half:]
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    return OptimizationTrace(history, tracker.solution(), evaluations, initial_best)


def fa_run(
    config: HfaConfig,
    objective: Objective,
    *,
    initial: Sequence[Sequence[float]] | None = None,
) -> OptimizationTrace:
    """Firefly algorithm over the whole population."""
    streams, pos, fit, tracker = _start(config, objective, initial)
    evaluations = config.population_size
    initial_best = tracker.fitness
    gamma = config.gamma
    history = []
    for k in range(config.max_iterations):
        evaluations += fa_iteration(
            pos, fit, objective, streams["fa"],
            params=config.firefly, gamma=gamma, iteration=k,
            bounds=config.bounds, orientation=config.orientation,
        )
        tracker.update(pos, fit, k + 1)
        history.append(tracker.fitness)
    return OptimizationTrace(history, tracker.solution(), evaluations, initial_best)


def de_run(
    config: HfaConfig,
    objective: Objective,
    *,
    initial: Sequence[Sequence[float]] | None = None,
    recorder: Callable[[DeEvent], None] | None = None,
) -> OptimizationTrace:
    """Classic DE/rand/1/bin over the whole population."""
    streams, pos, fit, tracker = _start(config, objective, initial)
    evaluations = config.population_size
    initial_best = tracker.fitness
    members = np.arange(config.population_size)
    history = []
    for k in range(config.max_iterations):
        pos, fit, ev = de_generation(
            pos, fit, members, objective, streams["de"],
            params=config.de, bounds=config.bounds,
            orientation=config.orientation, generation=k, recorder=recorder,
        )
        evaluations += ev
        tracker.update(pos, fit, k + 1)
        history.append(tracker.fitness)
    return OptimizationTrace(history, tracker.solution(), evaluations, initial_best)


ALGORITHMS = {"FA": fa_run, "DE": de_run, "HFA": hfa_run}
