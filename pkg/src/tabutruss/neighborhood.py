"""Exploratory and pattern moves on the design lattice.

Designs live on the lattice ``lower + j * min_step`` clipped to
``[lower, upper]``. Every point produced here is snapped back onto it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray
    min_step: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        st = np.atleast_1d(np.asarray(self.min_step, dtype=float))
        lo, hi, st = np.broadcast_arrays(lo, hi, st)
        if np.any(hi <= lo):
            raise ValueError("every upper bound must exceed its lower bound")
        if np.any(st <= 0):
            raise ValueError("min_step must be positive")
        object.__setattr__(self, "lower", lo.copy())
        object.__setattr__(self, "upper", hi.copy())
        object.__setattr__(self, "min_step", st.copy())

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def top(self) -> np.ndarray:
        """Largest lattice value not above ``upper`` for each variable."""
        return self.lower + np.floor((self.upper - self.lower) / self.min_step + 1e-9) * self.min_step

    def grid_size(self) -> np.ndarray:
        """Number of lattice values per variable."""
        return np.floor((self.upper - self.lower) / self.min_step + 1e-9).astype(int) + 1

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        tol = 1e-9 * self.min_step
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def on_grid(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        j = (x - self.lower) / self.min_step
        return bool(np.all(np.abs(j - np.round(j)) < 1e-6))


def snap(x, bounds: Bounds) -> np.ndarray:
    """Clip to bounds and round to the nearest lattice point (ties up)."""
    x = np.clip(np.asarray(x, dtype=float), bounds.lower, bounds.upper)
    j = np.floor((x - bounds.lower) / bounds.min_step + 0.5 + 1e-9)
    j = np.minimum(j, bounds.grid_size() - 1)
    return bounds.lower + j * bounds.min_step


def same_point(a, b, min_step) -> bool:
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) < 0.5 * np.asarray(min_step)))


@dataclass
class CandidateMove:
    point: np.ndarray
    objective: float = np.inf
    feasible: bool = False
    tabu: bool = False
    source: str = "explore"


def generate_neighborhood(base, step, bounds: Bounds) -> list[np.ndarray]:
    """All single-variable moves ``+step`` then ``-step``, in variable order.

    Moves that clip back onto ``base`` are dropped.
    """
    base = np.asarray(base, dtype=float)
    step = np.broadcast_to(np.asarray(step, dtype=float), base.shape)
    out = []
    for i in range(len(base)):
        for sign in (1.0, -1.0):
            x = base.copy()
            x[i] += sign * step[i]
            x = snap(x, bounds)
            if not same_point(x, base, bounds.min_step):
                out.append(x)
    return out


def select_move(candidates: Sequence[CandidateMove], tabu, incumbent: float) -> CandidateMove | None:
    """Best feasible candidate that is not tabu, or a tabu one that beats ``incumbent``.

    ``tabu`` is a container of points (usually a :class:`~tabutruss.memory.TabuList`)
    used to set each candidate's ``tabu`` flag; pass ``None`` to keep the
    flags already set. Ties go to the earlier candidate. ``None`` means no
    admissible move.
    """
    chosen = None
    for cand in candidates:
        if tabu is not None:
            cand.tabu = cand.point in tabu
        if not cand.feasible:
            continue
        if cand.tabu and not cand.objective < incumbent:
            continue
        if chosen is None or cand.objective < chosen.objective:
            chosen = cand
    return chosen


def pattern_move(old_base, new_base, k: float, bounds: Bounds) -> np.ndarray:
    """Extend the move ``old_base -> new_base`` by factor ``k`` from ``old_base``."""
    old_base = np.asarray(old_base, dtype=float)
    new_base = np.asarray(new_base, dtype=float)
    return snap(old_base + k * (new_base - old_base), bounds)


def first_improvement_move(base, base_value: float, step, bounds: Bounds,
                           func: Callable[[np.ndarray], float]) -> np.ndarray | None:
    """Classical Hooke-Jeeves exploration: accept the first improving coordinate move.

    Kept as a reference for comparing against full-neighborhood selection.
    """
    for x in generate_neighborhood(base, step, bounds):
        if func(x) < base_value:
            return x
    return None
