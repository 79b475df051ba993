"""Recency and elite memories of the tabu search."""

from __future__ import annotations

from collections import deque

import numpy as np


class TabuList:
    """FIFO of the last ``capacity`` accepted points.

    Membership compares component-wise within half a lattice step.
    """

    def __init__(self, capacity: int, min_step):
        if capacity < 1:
            raise ValueError("tabu list capacity must be at least 1")
        self.capacity = capacity
        self.min_step = np.asarray(min_step, dtype=float)
        self._entries: deque[np.ndarray] = deque(maxlen=capacity)

    def push(self, x) -> None:
        self._entries.append(np.array(x, dtype=float))

    def __contains__(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        half = 0.5 * self.min_step
        return any(np.all(np.abs(e - x) < half) for e in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)


def is_tabu(candidate, tabu: TabuList) -> bool:
    return candidate in tabu


class EliteList:
    """The ``capacity`` best distinct points seen, best first."""

    def __init__(self, capacity: int, min_step):
        if capacity < 1:
            raise ValueError("elite list capacity must be at least 1")
        self.capacity = capacity
        self.min_step = np.asarray(min_step, dtype=float)
        self.entries: list[tuple[np.ndarray, float]] = []

    def offer(self, x, value: float) -> bool:
        """Insert ``x`` if it is new and good enough; return whether it was kept."""
        x = np.array(x, dtype=float)
        half = 0.5 * self.min_step
        for i, (e, v) in enumerate(self.entries):
            if np.all(np.abs(e - x) < half):
                if value < v:
                    del self.entries[i]
                    break
                return False
        if len(self.entries) == self.capacity and value >= self.entries[-1][1]:
            return False
        self.entries.append((x, float(value)))
        self.entries.sort(key=lambda ev: ev[1])
        del self.entries[self.capacity:]
        return True

    def points(self) -> np.ndarray:
        return np.array([e for e, _ in self.entries])

    def __len__(self) -> int:
        return len(self.entries)
