"""Deterministic fixed-timestep racing simulator for Goblend."""
import json
import logging
import math
import zlib
from dataclasses import asdict, dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from goblend.env.cells import CellKey, discretize
from goblend.env.features import features
from goblend.env.track import TrackLayout, load_track
from goblend.errors import ContractViolationError, SnapshotDecodeError
from goblend.utils.rng import RngStream

logger = logging.getLogger(__name__)

Action = Tuple[int, int]  # (steer, gas)
INPUT_VALUES = (-1, 0, 1)
SNAPSHOT_FORMAT = "goblend-state/1"


class EnvConfig(BaseModel):
    """Simulator constants."""
    model_config = ConfigDict(extra="forbid")

    track_path: Optional[str] = None
    window_s: float = Field(0.25, gt=0)
    substeps: int = Field(5, ge=1)
    time_limit_s: float = Field(120.0, gt=0)
    laps: int = Field(2, ge=1, le=2)

    # Longitudinal dynamics (terminal speed on road = engine_accel / drag)
    v_max: float = Field(28.0, gt=0)
    engine_accel: float = 7.0
    brake_decel: float = 9.0
    rolling_decel: float = 0.5
    drag: float = 0.25
    grass_factor: float = Field(0.6, gt=0, le=1)

    # Kinematic bicycle with a grip limit on lateral acceleration
    wheelbase: float = 2.5
    max_steer_rad: float = 0.35
    grip_accel: float = 12.0
    grip_scrub: float = 0.05

    car_radius: float = 1.25
    opponent_speeds: Tuple[float, float, float] = (13.0, 15.0, 17.0)
    opponent_gaps: Tuple[float, float, float] = (8.0, 14.0, 20.0)
    opponent_jitter: float = Field(2.0, ge=0)

    view_cone_deg: float = 60.0
    view_distance_cap: float = 500.0

    @property
    def max_windows(self) -> int:
        return int(round(self.time_limit_s / self.window_s))


@dataclass(frozen=True)
class CarState:
    """Kinematic state of one car."""
    x: float
    y: float
    heading: float
    speed: float
    steer: int = 0
    gas: int = 0
    on_grass: bool = False
    crashed_this_window: bool = False
    track_s: float = 0.0


@dataclass(frozen=True)
class GameState:
    """Full simulator state at a window boundary; a value, never mutated."""
    player: CarState
    opponents: Tuple[CarState, ...]
    window_index: int
    lap: int
    score: int
    elapsed_s: float
    finished: bool
    rng_stream: RngStream
    seed: int
    next_gate: int = 0
    segment: int = 0
    lateral_offset: float = 0.0
    track_heading: float = 0.0
    prev_speed: float = 0.0
    last_crash_window: int = -1
    last_checkpoint_window: int = -1
    lap1_windows: Optional[int] = None
    off_playfield: bool = False


def wrap_angle(angle: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def validate_action(action: Sequence[int]) -> Action:
    try:
        steer, gas = action
    except (TypeError, ValueError) as e:
        raise ContractViolationError(f"action must be a (steer, gas) pair, got {action!r}") from e
    if steer not in INPUT_VALUES or gas not in INPUT_VALUES:
        raise ContractViolationError(f"steer and gas must be in {{-1, 0, 1}}, got {action!r}")
    return int(steer), int(gas)


class RacingEnv:
    """Two-lap checkpoint race against three waypoint-following opponents."""

    def __init__(self, layout: Optional[TrackLayout] = None, config: Optional[EnvConfig] = None):
        self.config = config or EnvConfig()
        self.layout = layout or load_track(self.config.track_path)
        self.checkpoints_per_lap = len(self.layout.checkpoints)
        self.max_score = self.checkpoints_per_lap * self.config.laps
        self.max_windows = self.config.max_windows
        self._dt = self.config.window_s / self.config.substeps
        self._tan_steer = math.tan(self.config.max_steer_rad)

    # ==================== LIFECYCLE ====================

    def reset(self, seed: int) -> GameState:
        """Start a race: player on the start gate at rest, opponents staggered ahead."""
        cfg = self.config
        stream = RngStream.from_seed(seed)
        jitter, stream = stream.uniform(len(cfg.opponent_speeds))

        x, y, heading = self.layout.point_at(self.layout.start_s)
        player = CarState(x=x, y=y, heading=wrap_angle(heading), speed=0.0, track_s=self.layout.start_s)

        opponents = []
        for speed, gap, u in zip(cfg.opponent_speeds, cfg.opponent_gaps, jitter):
            s = self.layout.start_s + gap + cfg.opponent_jitter * u
            ox, oy, oh = self.layout.rail_pose(s)
            opponents.append(CarState(x=ox, y=oy, heading=wrap_angle(oh), speed=speed, track_s=s))

        tp = self.layout.project(x, y)
        return GameState(
            player=player,
            opponents=tuple(opponents),
            window_index=0,
            lap=1,
            score=0,
            elapsed_s=0.0,
            finished=False,
            rng_stream=stream,
            seed=seed,
            segment=tp.segment,
            lateral_offset=tp.lateral,
            track_heading=tp.heading,
        )

    def step(self, state: GameState, action: Sequence[int]) -> GameState:
        """Advance one 250 ms window through fixed physics substeps."""
        if state.finished:
            raise ContractViolationError("cannot step a finished race")
        steer, gas = validate_action(action)
        cfg = self.config
        layout = self.layout
        dt = self._dt
        window = state.window_index + 1

        x, y = state.player.x, state.player.y
        heading, speed = state.player.heading, state.player.speed
        on_grass = state.player.on_grass
        crashed = False
        segment = state.segment
        score = state.score
        next_gate = state.next_gate
        last_checkpoint = state.last_checkpoint_window
        lap1_windows = state.lap1_windows
        opponents = state.opponents
        tp = None

        for _ in range(cfg.substeps):
            opponents = tuple(self._advance_opponent(o, dt) for o in opponents)

            # Longitudinal
            if gas > 0:
                accel = cfg.engine_accel * (cfg.grass_factor if on_grass else 1.0)
            elif gas < 0:
                accel = -cfg.brake_decel
            else:
                accel = -cfg.rolling_decel
            accel -= cfg.drag * speed
            speed = min(max(speed + accel * dt, 0.0), cfg.v_max)

            # Lateral, grip-limited yaw
            if steer != 0 and speed > 0.0:
                yaw_rate = speed * self._tan_steer / cfg.wheelbase
                grip_cap = cfg.grip_accel / speed
                if yaw_rate > grip_cap:
                    yaw_rate = grip_cap
                    speed *= 1.0 - cfg.grip_scrub * dt
                heading = wrap_angle(heading + steer * yaw_rate * dt)

            x += speed * math.cos(heading) * dt
            y += speed * math.sin(heading) * dt

            # Car contact: positional separation of the player only
            min_gap = 2.0 * cfg.car_radius
            for opp in opponents:
                dx, dy = x - opp.x, y - opp.y
                dist = math.hypot(dx, dy)
                if dist < min_gap:
                    if dist == 0.0:
                        dx, dy, dist = -math.sin(opp.heading), math.cos(opp.heading), 1.0
                    x = opp.x + dx / dist * min_gap
                    y = opp.y + dy / dist * min_gap
                    crashed = True

            # Barrier: inelastic, keep only the velocity component along the track
            tp = layout.project(x, y)
            barrier = layout.barrier(tp.segment)
            if abs(tp.lateral) > barrier:
                scale = barrier / abs(tp.lateral)
                x = tp.foot_x + (x - tp.foot_x) * scale
                y = tp.foot_y + (y - tp.foot_y) * scale
                along = math.cos(heading - tp.heading)
                speed *= abs(along)
                heading = tp.heading if along >= 0.0 else wrap_angle(tp.heading + math.pi)
                crashed = True
                tp = layout.project(x, y)
            on_grass = abs(tp.lateral) > layout.half_width(tp.segment)

            # Checkpoints: a gate counts when its segment is entered from the one before it
            if tp.segment != segment and score < self.max_score:
                gate_segment = layout.checkpoints[next_gate]
                if tp.segment == gate_segment and segment == (gate_segment - 1) % layout.segment_count:
                    score += 1
                    next_gate = (next_gate + 1) % self.checkpoints_per_lap
                    last_checkpoint = window
                    if score == self.checkpoints_per_lap and lap1_windows is None:
                        lap1_windows = window
            segment = tp.segment

        elapsed = window * cfg.window_s
        lap = 1 + min(score // self.checkpoints_per_lap, cfg.laps - 1)
        player = CarState(
            x=x, y=y, heading=heading, speed=speed, steer=steer, gas=gas,
            on_grass=on_grass, crashed_this_window=crashed, track_s=tp.s,
        )
        return replace(
            state,
            player=player,
            opponents=opponents,
            window_index=window,
            lap=lap,
            score=score,
            elapsed_s=elapsed,
            finished=score >= self.max_score or window >= self.max_windows,
            next_gate=next_gate,
            segment=tp.segment,
            lateral_offset=tp.lateral,
            track_heading=tp.heading,
            prev_speed=state.player.speed,
            last_crash_window=window if crashed else state.last_crash_window,
            last_checkpoint_window=last_checkpoint,
            lap1_windows=lap1_windows,
            off_playfield=not layout.within_bounds(x, y),
        )

    def _advance_opponent(self, car: CarState, dt: float) -> CarState:
        s = car.track_s + car.speed * dt
        x, y, heading = self.layout.rail_pose(s)
        return CarState(x=x, y=y, heading=heading, speed=car.speed, track_s=s % self.layout.rail_length)

    def rollout(self, seed: int, actions: Iterable[Sequence[int]]) -> List[GameState]:
        """Replay an action log from reset; returns the state after every window."""
        state = self.reset(seed)
        states = []
        for action in actions:
            state = self.step(state, action)
            states.append(state)
        return states

    def replay(self, seed: int, actions: Iterable[Sequence[int]]) -> GameState:
        """Final state of an action log replayed from reset."""
        state = self.reset(seed)
        for action in actions:
            state = self.step(state, action)
        return state

    # ==================== OBSERVATION ====================

    def features(self, state: GameState) -> np.ndarray:
        return features(state, self)

    def discretize(self, state: GameState) -> CellKey:
        return discretize(state, self.layout, self.config.v_max)

    # ==================== SNAPSHOTS ====================

    @staticmethod
    def snapshot(state: GameState) -> bytes:
        """Opaque, checksummed encoding of a state."""
        payload = {"format": SNAPSHOT_FORMAT, "state": asdict(state)}
        return zlib.compress(json.dumps(payload, separators=(",", ":")).encode("utf-8"), 1)

    @staticmethod
    def restore(blob: bytes) -> GameState:
        """Decode a snapshot back into a state equal to the original."""
        try:
            payload = json.loads(zlib.decompress(blob).decode("utf-8"))
            if payload.get("format") != SNAPSHOT_FORMAT:
                raise SnapshotDecodeError(f"unknown snapshot format {payload.get('format')!r}")
            raw = dict(payload["state"])
            raw["player"] = CarState(**raw["player"])
            raw["opponents"] = tuple(CarState(**o) for o in raw["opponents"])
            raw["rng_stream"] = RngStream(**raw["rng_stream"])
            return GameState(**raw)
        except SnapshotDecodeError:
            raise
        except (zlib.error, UnicodeDecodeError, ValueError, KeyError, TypeError, AttributeError) as e:
            raise SnapshotDecodeError(f"corrupted snapshot: {e}") from e
