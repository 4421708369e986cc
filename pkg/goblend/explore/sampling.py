"""Weighted-random action sampling from observed input frequencies."""
from dataclasses import dataclass
from typing import Iterable, List, Union

import numpy as np

from goblend.env.racing import Action

ACTIONS: List[Action] = [(steer, gas) for steer in (-1, 0, 1) for gas in (-1, 0, 1)]
ACTION_INDEX = {action: i for i, action in enumerate(ACTIONS)}
NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class ActionTable:
    """Probabilities over the nine (steer, gas) combinations, in ACTIONS order."""
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(ACTIONS),):
            raise ValueError(f"action table needs {len(ACTIONS)} entries, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("action probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"action probabilities sum to {p.sum()}, not 1")
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "_cdf", cdf)

    @classmethod
    def uniform(cls) -> "ActionTable":
        return cls(np.full(len(ACTIONS), 1.0 / len(ACTIONS)))

    def as_dict(self) -> dict:
        return {f"{s},{g}": float(p) for (s, g), p in zip(ACTIONS, self.probabilities)}

    def draw(self, rng: np.random.Generator) -> Action:
        index = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return ACTIONS[min(index, len(ACTIONS) - 1)]


def sample_action(table: Union[ActionTable, np.ndarray], rng: np.random.Generator) -> Action:
    """Categorical draw of one (steer, gas) pair."""
    if not isinstance(table, ActionTable):
        table = ActionTable(np.asarray(table, dtype=float))
    return table.draw(rng)


def action_frequencies(sessions: Iterable) -> ActionTable:
    """Normalized frequency of every input combination over all windows of the sessions."""
    counts = np.zeros(len(ACTIONS))
    for session in sessions:
        actions = np.asarray(session.actions, dtype=int).reshape(-1, 2)
        codes = (actions[:, 0] + 1) * 3 + (actions[:, 1] + 1)
        counts += np.bincount(codes, minlength=len(ACTIONS))
    total = counts.sum()
    if total == 0:
        raise ValueError("no actions to count")
    return ActionTable(counts / total)

