"""Grey wolf optimizer (canonical alpha/beta/delta update)."""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class GwoParams:
    population: int = 25
    dimensions: int = 1
    lower: float = 0.0
    upper: float = 1.0
    max_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.population < 3:
            raise ValueError("population must be >= 3 so alpha, beta and delta exist")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        if self.dimensions < 1 or self.max_iter < 0:
            raise ValueError("dimensions >= 1 and max_iter >= 0 required")


@dataclass
class GwoResult:
    best_position: np.ndarray
    best_value: float
    trace: list = field(default_factory=list)
    best_positions: list = field(default_factory=list)


def gwo_minimize(objective: Callable[[np.ndarray], float], params: GwoParams) -> GwoResult:
    """Minimise ``objective`` over the box ``[lower, upper]^dimensions``.

    The leaders are the three best positions ever evaluated, so ``trace``
    (best value after initialisation and after each iteration) never
    increases.  Objective values are computed one wolf at a time in index
    order.
    """
    rng = np.random.default_rng(params.seed)
    n, d = params.population, params.dimensions
    lo, hi = params.lower, params.upper
    pos = lo + (hi - lo) * rng.random((n, d))
    fit = np.array([float(objective(p)) for p in pos])

    order = np.argsort(fit, kind="stable")[:3]
    leaders = pos[order].copy()
    leader_fit = fit[order].copy()
    trace = [float(leader_fit[0])]
    best_positions = [leaders[0].copy()]

    for it in range(params.max_iter):
        a = 2.0 - 2.0 * it / params.max_iter
        moves = []
        for k in range(3):
            r1 = rng.random((n, d))
            r2 = rng.random((n, d))
            big_a = 2.0 * a * r1 - a
            big_c = 2.0 * r2
            dist = np.abs(big_c * leaders[k] - pos)
            moves.append(leaders[k] - big_a * dist)
        pos = np.clip((moves[0] + moves[1] + moves[2]) / 3.0, lo, hi)
        fit = np.array([float(objective(p)) for p in pos])

        pool = np.vstack([leaders, pos])
        pool_fit = np.concatenate([leader_fit, fit])
        order = np.argsort(pool_fit, kind="stable")[:3]
        leaders = pool[order].copy()
        leader_fit = pool_fit[order].copy()
        trace.append(float(leader_fit[0]))
        best_positions.append(leaders[0].copy())

    return GwoResult(leaders[0].copy(), float(leader_fit[0]), trace, best_positions)
