"""Trace-similarity rewards and their blend."""
from typing import List, Sequence

import numpy as np

from goblend.errors import RewardInputError


def _check_unit(values: np.ndarray, what: str):
    if values.size == 0:
        raise RewardInputError(f"{what} is empty")
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise RewardInputError(f"{what} has values outside [0, 1]")


class SimilarityAccumulator:
    """Running mean of (1 - |h(i) - t(i)|)^2, summed strictly left to right.

    The target is held at its final value past its end. Exploration extends one window at a
    time and recomputation from a full trace goes through the same additions, so both give
    bit-identical results.
    """

    __slots__ = ("_target", "_last", "total", "count")

    def __init__(self, target: Sequence[float], total: float = 0.0, count: int = 0):
        if isinstance(target, list):
            self._target: List[float] = target
        else:
            arr = np.asarray(target, dtype=float)
            _check_unit(arr, "target trace")
            self._target = arr.tolist()
        if not self._target:
            raise RewardInputError("target trace is empty")
        self._last = len(self._target) - 1
        self.total = total
        self.count = count

    def add(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise RewardInputError(f"trace value {value} outside [0, 1]")
        t = self._target[self.count if self.count < self._last else self._last]
        d = 1.0 - abs(value - t)
        self.total += d * d
        self.count += 1

    def copy(self) -> "SimilarityAccumulator":
        return SimilarityAccumulator(self._target, self.total, self.count)

    @property
    def value(self) -> float:
        if self.count == 0:
            raise RewardInputError("trace is empty")
        return self.total / self.count


def reward_similarity(h: Sequence[float], t: Sequence[float]) -> float:
    """Average squared similarity between an agent trace and a target trace."""
    h = np.asarray(h, dtype=float)
    _check_unit(h, "trace")
    acc = SimilarityAccumulator(np.asarray(t, dtype=float))
    for value in h.tolist():
        acc.add(value)
    return acc.value


def blend(r_e: float, r_b: float, lam: float) -> float:
    """lam * R_e + (1 - lam) * R_b."""
    for name, value in (("R_e", r_e), ("R_b", r_b), ("lambda", lam)):
        if not 0.0 <= value <= 1.0:
            raise RewardInputError(f"{name}={value} outside [0, 1]")
    return lam * r_e + (1.0 - lam) * r_b
