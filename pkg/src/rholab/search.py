"""
Multi-start projected local search used by the modulus and operator-norm estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
import numpy.typing as npt

Array = npt.NDArray[np.float64]
Projection = Callable[[Array], Optional[Array]]


@dataclass
class SearchResult:
    point: Array
    value: float
    starts: int
    evaluations: int


def hill_climb(
    objective: Callable[[Array], float],
    start: Array,
    project: Projection,
    rng: np.random.Generator,
    steps: int = 200,
    step: float = 0.25,
    shrink: float = 0.5,
    patience: int = 3,
    min_step: float = 1e-10,
) -> tuple[Array, float, int]:
    """Maximize ``objective`` from a feasible start by random projected moves.

    A move is accepted only if it is feasible and strictly improves the value,
    so the returned value is never below the start value.
    """
    best = start
    best_value = objective(start)
    failures = 0
    evaluations = 1
    for _ in range(steps):
        if step < min_step:
            break
        candidate = project(best + step * rng.standard_normal(best.shape))
        if candidate is not None:
            value = objective(candidate)
            evaluations += 1
            if value > best_value:
                best, best_value = candidate, value
                failures = 0
                continue
        failures += 1
        if failures >= patience:
            step *= shrink
            failures = 0
    return best, best_value, evaluations


def multi_start(
    objective: Callable[[Array], float],
    starts: Iterable[Array],
    project: Projection,
    rng: np.random.Generator,
    steps: int = 200,
) -> SearchResult:
    """Run hill_climb from every start and keep the best point."""
    best_point: Optional[Array] = None
    best_value = -np.inf
    count = 0
    evaluations = 0
    for start in starts:
        count += 1
        point, value, used = hill_climb(objective, start, project, rng, steps=steps)
        evaluations += used
        if value > best_value:
            best_point, best_value = point, value
    if best_point is None:
        raise ValueError("multi_start needs at least one start")
    return SearchResult(best_point, float(best_value), count, evaluations)
