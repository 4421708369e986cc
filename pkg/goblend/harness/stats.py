"""In-game statistics and reward comparisons from fresh replays."""
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from goblend.affect.knn import AffectIndex, estimate_arousal
from goblend.env.features import FEATURE_INDEX
from goblend.env.racing import RacingEnv
from goblend.errors import ReplayDivergenceError
from goblend.explore.rewards import reward_similarity

STAT_FIELDS = [
    "final_score",
    "lap1_time_s",
    "average_speed",
    "nearest_car",
    "offroad_pct",
    "crash_pct",
    "length",
]


@dataclass(frozen=True)
class InGameStatistics:
    final_score: int
    lap1_time_s: Optional[float]
    average_speed: float
    nearest_car: float
    offroad_pct: float
    crash_pct: float
    length: int

    def to_dict(self) -> dict:
        return asdict(self)


def compute_stats(actions: Sequence[Sequence[int]], env: RacingEnv, seed: int,
                  expected_h_b: Optional[Sequence[float]] = None) -> InGameStatistics:
    """Statistics of a deterministic replay of the action log.

    When the cached behavior trace is given, the replayed score trace must match it exactly.
    """
    states = env.rollout(seed, actions)
    if expected_h_b is not None:
        replayed = [s.score / env.max_score for s in states]
        if len(replayed) != len(expected_h_b) or any(a != b for a, b in zip(replayed, expected_h_b)):
            raise ReplayDivergenceError(f"replay of {len(actions)} actions from seed {seed} diverged from its score trace")
    if not states:
        return InGameStatistics(0, None, 0.0, env.config.view_distance_cap, 0.0, 0.0, 0)

    final = states[-1]
    nearest = FEATURE_INDEX["nearest_visible_opponent"]
    return InGameStatistics(
        final_score=final.score,
        lap1_time_s=final.lap1_windows * env.config.window_s if final.lap1_windows is not None else None,
        average_speed=float(np.mean([s.player.speed for s in states])),
        nearest_car=float(np.mean([env.features(s)[nearest] for s in states])),
        offroad_pct=100.0 * float(np.mean([s.player.on_grass for s in states])),
        crash_pct=100.0 * float(np.mean([s.player.crashed_this_window for s in states])),
        length=len(states),
    )


def compare_rewards(actions: Sequence[Sequence[int]], persona, env: RacingEnv, seed: int,
                    affect_index: AffectIndex) -> Tuple[float, float]:
    """(R_b, R_e) of the full replayed trajectory against a persona's targets."""
    states = env.rollout(seed, actions)
    if not states:
        return 0.0, 0.0
    h_b = [s.score / env.max_score for s in states]
    h_e = [estimate_arousal(affect_index, env.features(s)) for s in states]
    return reward_similarity(h_b, persona.score_trace), reward_similarity(h_e, persona.arousal_trace)
