"""Firefly algorithm operators.

Brightness is the objective value itself (flipped for minimization); only
the attractiveness term decays with distance.  Fireflies are updated in
place inside the double loop, so a firefly moved earlier in the sweep is
seen at its new position by later comparisons.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    FireflyParams,
    Orientation,
    StepDistribution,
    clamp,
    euclidean_distance,
)

LEVY_INDEX = 1.5
# Lévy and Gaussian steps are scaled to this fraction of each bound width.
HEAVY_STEP_FRACTION = 0.01


def _mantegna_sigma(index: float) -> float:
    num = math.gamma(1 + index) * math.sin(math.pi * index / 2)
    den = math.gamma((1 + index) / 2) * index * 2 ** ((index - 1) / 2)
    return (num / den) ** (1 / index)


_SIGMA_U = _mantegna_sigma(LEVY_INDEX)


def attractiveness(beta0: float, gamma: float, r: float) -> float:
    """``beta0 * exp(-gamma * r**2)``."""
    return beta0 * math.exp(-gamma * r * r)


def levy_step(rng: np.random.Generator, dimension: int) -> np.ndarray:
    """Heavy-tailed step vector drawn with Mantegna's algorithm (index 1.5).

    ``u ~ N(0, sigma_u^2)``, ``v ~ N(0, 1)``, step ``= u / |v|^(1/1.5)``.
    """
    u = rng.standard_normal(dimension) * _SIGMA_U
    v = rng.standard_normal(dimension)
    return u / np.abs(v) ** (1.0 / LEVY_INDEX)


def random_step(
    rng: np.random.Generator,
    distribution: StepDistribution,
    widths: np.ndarray,
) -> np.ndarray:
    """Random-walk term of a firefly move, already scaled by bound widths."""
    d = widths.shape[0]
    if distribution is StepDistribution.LEVY:
        return levy_step(rng, d) * (HEAVY_STEP_FRACTION * widths)
    if distribution is StepDistribution.GAUSSIAN:
        return rng.standard_normal(d) * (HEAVY_STEP_FRACTION * widths)
    return (rng.random(d) - 0.5) * widths


def firefly_move(
    xi,
    xj,
    params: FireflyParams,
    iteration: int,
    rng: np.random.Generator,
    *,
    gamma: float,
    bounds: np.ndarray | None = None,
    beta0: float | None = None,
) -> np.ndarray:
    """Move firefly ``xi`` toward the brighter ``xj``.

    Returns ``xi + beta0*exp(-gamma*r^2)*(xj - xi) + eta*eps`` clamped to
    ``bounds``.  ``beta0`` defaults to a fresh ``beta0_scale * U(0, 1)``
    draw; ``eta`` follows the geometric schedule of ``params``.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    r = euclidean_distance(xi, xj)
    if beta0 is None:
        beta0 = params.beta0_scale * rng.random()
    beta = attractiveness(beta0, gamma, r)
    widths = np.ones_like(xi) if bounds is None else bounds[:, 1] - bounds[:, 0]
    eps = random_step(rng, params.step_distribution, widths)
    moved = xi + beta * (xj - xi) + params.eta(iteration) * eps
    return clamp(moved, bounds)


def fa_iteration(
    positions: np.ndarray,
    fitness: np.ndarray,
    objective,
    rng: np.random.Generator,
    *,
    params: FireflyParams,
    gamma: float,
    iteration: int,
    bounds: np.ndarray | None,
    orientation: Orientation,
) -> int:
    """One sweep of the firefly double loop, in place.

    Every firefly ``i`` is compared with every ``j``; when ``j`` is strictly
    brighter, ``i`` moves toward it and is re-evaluated immediately.  The
    arrays are re-ranked best-first at the end.  Returns the number of
    objective evaluations.
    """
    n = positions.shape[0]
    evals = 0
    for i in range(n):
        for j in range(n):
            if orientation.better(fitness[j], fitness[i]):
                positions[i] = firefly_move(
                    positions[i], positions[j], params, iteration, rng,
                    gamma=gamma, bounds=bounds,
                )
                fitness[i] = objective(positions[i])
                evals += 1
    order = orientation.rank(fitness)
    positions[:] = positions[order]
    fitness[:] = fitness[order]
    return evals
