"""Per-window feature vector of the racing simulator."""
import math
from typing import TYPE_CHECKING, List

import numpy as np

if TYPE_CHECKING:
    from goblend.env.racing import GameState, RacingEnv

FEATURE_SCHEMA_VERSION = 1

FEATURE_NAMES: List[str] = [
    "pos_x",
    "pos_y",
    "heading",
    "speed",
    "steer_input",
    "gas_input",
    "on_grass",
    "crashed",
    "score",
    "lap",
    "segment",
    "opponent_1_distance",
    "opponent_2_distance",
    "opponent_3_distance",
    "opponent_1_speed",
    "opponent_2_speed",
    "opponent_3_speed",
    "nearest_visible_opponent",
    "lateral_offset",
    "heading_error",
    "speed_delta",
    "checkpoint_progress",
    "time_since_crash",
    "time_since_checkpoint",
]
FEATURE_COUNT = len(FEATURE_NAMES)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}


def nearest_visible_opponent(state: "GameState", cone_deg: float, cap: float) -> float:
    """Distance to the closest opponent inside the forward view cone, capped."""
    player = state.player
    half_cone = math.radians(cone_deg)
    best = cap
    for opp in state.opponents:
        dx, dy = opp.x - player.x, opp.y - player.y
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            return 0.0
        bearing = math.atan2(dy, dx) - player.heading
        bearing = math.atan2(math.sin(bearing), math.cos(bearing))
        if abs(bearing) <= half_cone and dist < best:
            best = dist
    return min(best, cap)


def checkpoint_progress(state: "GameState", env: "RacingEnv") -> float:
    """Fraction of the way from the previous gate to the next one."""
    layout = env.layout
    length = layout.total_length
    prev_s = layout.gate_s((state.next_gate - 1) % env.checkpoints_per_lap)
    next_s = layout.gate_s(state.next_gate)
    span = (next_s - prev_s) % length or length
    done = (state.player.track_s - prev_s) % length
    return min(max(done / span, 0.0), 1.0)


def features(state: "GameState", env: "RacingEnv") -> np.ndarray:
    """Fixed-order feature vector for the window that ended at this state."""
    cfg = env.config
    player = state.player
    distances = [math.hypot(o.x - player.x, o.y - player.y) for o in state.opponents]
    heading_error = math.atan2(
        math.sin(player.heading - state.track_heading),
        math.cos(player.heading - state.track_heading),
    )
    last_crash = max(state.last_crash_window, 0)
    last_checkpoint = max(state.last_checkpoint_window, 0)
    return np.array([
        player.x,
        player.y,
        player.heading,
        player.speed,
        player.steer,
        player.gas,
        1.0 if player.on_grass else 0.0,
        1.0 if player.crashed_this_window else 0.0,
        state.score,
        state.lap,
        state.segment,
        *distances,
        *(o.speed for o in state.opponents),
        nearest_visible_opponent(state, cfg.view_cone_deg, cfg.view_distance_cap),
        state.lateral_offset,
        heading_error,
        player.speed - state.prev_speed,
        checkpoint_progress(state, env),
        (state.window_index - last_crash) * cfg.window_s,
        (state.window_index - last_checkpoint) * cfg.window_s,
    ], dtype=float)
