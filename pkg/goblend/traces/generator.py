"""Scripted drivers that stand in for human play sessions."""
import logging
import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from goblend.env.racing import Action, EnvConfig, GameState, RacingEnv, wrap_angle
from goblend.traces.arousal import AnnotatorProfile, annotate_arousal
from goblend.traces.session import GENERATOR_VERSION, PlaySession, PlaytraceDataset, normalize_trace

logger = logging.getLogger(__name__)


class SkillTier(str, Enum):
    EXPERT = "expert"
    ADVANCED = "advanced"
    INTERMEDIATE = "intermediate"
    BEGINNER = "beginner"


class TierProfile(BaseModel):
    """Driving quality of one skill tier."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    target_speed_fraction: float = Field(gt=0, le=1)
    # Lateral offset of the driven line from the centerline, positive to the left
    line_offset_m: float = 0.0
    corner_speed_fraction: float = Field(gt=0, le=1.5)
    steering_noise: float = Field(ge=0)
    mistake_prob: float = Field(ge=0, le=1)
    mistake_windows: int = Field(4, ge=1)
    speed_jitter: float = Field(0.02, ge=0)


DEFAULT_TIERS: Dict[SkillTier, TierProfile] = {
    # Every line lies right of the opponents' lane at +2.5 m
    SkillTier.EXPERT: TierProfile(
        target_speed_fraction=0.90, line_offset_m=-1.5, corner_speed_fraction=0.95,
        steering_noise=0.01, mistake_prob=0.0,
    ),
    SkillTier.ADVANCED: TierProfile(
        target_speed_fraction=0.72, line_offset_m=-3.5, corner_speed_fraction=0.82,
        steering_noise=0.03, mistake_prob=0.001,
    ),
    SkillTier.INTERMEDIATE: TierProfile(
        target_speed_fraction=0.56, line_offset_m=-5.0, corner_speed_fraction=0.70,
        steering_noise=0.05, mistake_prob=0.003,
    ),
    SkillTier.BEGINNER: TierProfile(
        target_speed_fraction=0.42, line_offset_m=-6.5, corner_speed_fraction=0.60,
        steering_noise=0.08, mistake_prob=0.01,
    ),
}

DEFAULT_COHORT: Dict[SkillTier, int] = {
    SkillTier.EXPERT: 27,
    SkillTier.ADVANCED: 32,
    SkillTier.INTERMEDIATE: 19,
    SkillTier.BEGINNER: 30,
}


class GeneratorConfig(BaseModel):
    """Synthetic cohort parameters."""
    model_config = ConfigDict(extra="forbid")

    tiers: Dict[SkillTier, TierProfile] = Field(default_factory=lambda: dict(DEFAULT_TIERS))
    cohort: Dict[SkillTier, int] = Field(default_factory=lambda: dict(DEFAULT_COHORT))
    annotator: AnnotatorProfile = Field(default_factory=AnnotatorProfile)
    seed: int = 2022

    # Per-session annotator jitter
    gain_jitter: Tuple[float, float] = (0.7, 1.3)
    bias_jitter: float = Field(0.2, ge=0)
    drift_jitter: float = Field(0.002, ge=0)

    # Pure pursuit
    lookahead_m: float = Field(12.0, gt=0)
    steer_deadband_rad: float = Field(0.03, ge=0)
    brake_lookahead_m: float = Field(35.0, ge=0)
    gas_band: Tuple[float, float] = (0.3, 0.7)


class ScriptedDriver:
    """Pure-pursuit driver along the centerline with tier-dependent speed, noise and mistakes."""

    def __init__(self, env: RacingEnv, tier: TierProfile, config: GeneratorConfig, rng: np.random.Generator):
        self.env = env
        self.tier = tier
        self.config = config
        self.rng = rng
        v_max = env.config.v_max
        jitter = 1.0 + tier.speed_jitter * rng.uniform(-1.0, 1.0)
        self.cruise_speed = v_max * tier.target_speed_fraction * jitter
        self.mistake_left = 0
        self.mistake_steer = 0

    def corner_speed(self, radius: float) -> float:
        return self.tier.corner_speed_fraction * math.sqrt(self.env.config.grip_accel * radius)

    def target_speed(self, state: GameState) -> float:
        """Cruise speed, capped by any curve within braking distance."""
        layout = self.env.layout
        target = self.cruise_speed
        s = state.player.track_s
        step = 5.0
        ahead = 0.0
        while ahead <= self.config.brake_lookahead_m:
            seg = layout.segment_at(s + ahead)
            if seg.is_curve and seg.radius:
                target = min(target, self.corner_speed(seg.radius))
            ahead += step
        return target

    def steer(self, state: GameState) -> int:
        player = state.player
        tx, ty, _ = self.env.layout.point_at(player.track_s + self.config.lookahead_m, lateral=self.tier.line_offset_m)
        desired = math.atan2(ty - player.y, tx - player.x)
        error = wrap_angle(desired - player.heading)
        if self.tier.steering_noise > 0:
            error += self.rng.normal(0.0, self.tier.steering_noise)
        if abs(error) <= self.config.steer_deadband_rad:
            return 0
        return 1 if error > 0 else -1

    def gas(self, state: GameState) -> int:
        speed = state.player.speed
        target = self.target_speed(state)
        low, high = self.config.gas_band
        if speed < target - low:
            return 1
        if speed > target + high:
            return -1
        return 0

    def act(self, state: GameState) -> Action:
        if self.mistake_left > 0:
            self.mistake_left -= 1
            return self.mistake_steer, 1
        if self.rng.random() < self.tier.mistake_prob:
            self.mistake_left = self.tier.mistake_windows - 1
            self.mistake_steer = int(self.rng.choice((-1, 1)))
            return self.mistake_steer, 1
        return self.steer(state), self.gas(state)


def play(env: RacingEnv, driver: ScriptedDriver, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Drive one race to the end; returns the feature rows and actions."""
    state = env.reset(seed)
    rows: List[np.ndarray] = []
    actions: List[Action] = []
    while not state.finished:
        action = driver.act(state)
        state = env.step(state, action)
        rows.append(env.features(state))
        actions.append(action)
    return np.vstack(rows), np.asarray(actions, dtype=int)


def generate_session(layout, tier: SkillTier, seed: int, config: Optional[GeneratorConfig] = None,
                     env_config: Optional[EnvConfig] = None, annotator: Optional[AnnotatorProfile] = None,
                     session_id: Optional[str] = None) -> PlaySession:
    """One synthetic session for a tier, annotated and normalized."""
    config = config or GeneratorConfig()
    tier = SkillTier(tier)
    env = RacingEnv(layout, env_config)
    driver = ScriptedDriver(env, config.tiers[tier], config, np.random.default_rng(seed))
    features, actions = play(env, driver, seed)

    session = PlaySession(
        session_id=session_id or f"{tier.value}-{seed}",
        features=features,
        actions=actions,
        arousal=np.zeros(len(features)),
        tier_hint=tier.value,
        seed=seed,
        generator=GENERATOR_VERSION,
    )
    raw = annotate_arousal(
        session, annotator or config.annotator, seed=seed + 1,
        window_s=env.config.window_s, v_max=env.config.v_max,
    )
    session.arousal = normalize_trace(raw)
    return session


def jitter_annotator(base: AnnotatorProfile, config: GeneratorConfig, rng: np.random.Generator) -> AnnotatorProfile:
    """Per-session annotator around the configured profile."""
    low, high = config.gain_jitter
    return base.model_copy(update={
        "gain": base.gain * rng.uniform(low, high),
        "bias": base.bias + rng.uniform(-config.bias_jitter, config.bias_jitter),
        "drift": base.drift + rng.uniform(-config.drift_jitter, config.drift_jitter),
    })


def generate_cohort(config: Optional[GeneratorConfig] = None, layout=None,
                    env_config: Optional[EnvConfig] = None) -> PlaytraceDataset:
    """The full synthetic cohort, tier by tier, with one jittered annotator per session."""
    config = config or GeneratorConfig()
    env = RacingEnv(layout, env_config)
    rng = np.random.default_rng(config.seed)
    sessions: List[PlaySession] = []
    index = 0
    for tier in SkillTier:
        count = config.cohort.get(tier, 0)
        for i in range(count):
            seed = config.seed * 1000 + index
            annotator = jitter_annotator(config.annotator, config, rng)
            sessions.append(generate_session(
                env.layout, tier, seed, config=config, env_config=env.config,
                annotator=annotator, session_id=f"{tier.value}-{i:03d}",
            ))
            index += 1
        logger.info("Generated %d %s sessions", count, tier.value)
    dataset = PlaytraceDataset(sessions)
    logger.info("Cohort ready: %d sessions, %d windows", len(dataset), dataset.window_count())
    return dataset
