"""Small lattice problems whose optimum is found by exhaustive enumeration.

Used to check that the search reaches the true lattice optimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .engine import FunctionProblem
from .neighborhood import Bounds


@dataclass(frozen=True)
class SyntheticCase:
    name: str
    func: Callable[[np.ndarray], float]
    bounds: Bounds
    constraint: Callable[[np.ndarray], bool] | None = None

    def problem(self) -> FunctionProblem:
        return FunctionProblem(self.func, self.bounds, self.constraint)

    def grid_points(self) -> int:
        return int(np.prod(self.bounds.grid_size()))

    def lattice(self) -> np.ndarray:
        """Every lattice point, one per row."""
        axes = [lo + np.arange(n) * st for lo, n, st in
                zip(self.bounds.lower, self.bounds.grid_size(), self.bounds.min_step)]
        return np.array(list(itertools.product(*axes)))

    def enumerate_optimum(self) -> tuple[np.ndarray, float]:
        """Brute-force minimum over the feasible lattice."""
        best_x, best_v = None, np.inf
        for x in self.lattice():
            if self.constraint is not None and not self.constraint(x):
                continue
            v = self.func(x)
            if v < best_v:
                best_x, best_v = x, v
        return best_x, float(best_v)

    def random_start(self, rng: np.random.Generator) -> np.ndarray:
        while True:
            x = self.bounds.lower + rng.integers(0, self.bounds.grid_size()) * self.bounds.min_step
            if self.constraint is None or self.constraint(x):
                return x


def double_well(x) -> float:
    """Curved valley with two basins; the left one is deeper."""
    return float((x[0] ** 2 - 1.0) ** 2 + 0.3 * x[0] + 2.0 * (x[1] - 0.5 * x[0] ** 2) ** 2)


def ripple_bowl(x) -> float:
    """Quadratic bowl with a cosine ripple giving many shallow local minima."""
    x = np.asarray(x, dtype=float)
    return float(np.sum(0.5 * (x - 0.4) ** 2 + 1.2 * (1.0 - np.cos(2.0 * np.pi * x / 1.5))))


def shifted_quadratic(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum((x - np.array([0.3, 0.9, 1.7, 0.6])) ** 2 * np.array([1.0, 2.0, 0.5, 3.0])))


def budget_constraint(x) -> bool:
    return bool(np.sum(x) >= 6.0 - 1e-12)


CASES = (
    SyntheticCase("double_well", double_well, Bounds([-2.0, -2.0], [2.0, 2.0], 0.02)),
    SyntheticCase("ripple_bowl", ripple_bowl, Bounds([-3.0] * 3, [3.0] * 3, 0.15)),
    SyntheticCase("constrained_quadratic", shifted_quadratic, Bounds([0.0] * 4, [4.0] * 4, 0.25),
                  budget_constraint),
)
