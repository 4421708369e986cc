"""Synthetic arousal annotation of play sessions."""
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from goblend.env.features import FEATURE_INDEX
from goblend.traces.session import PlaySession

OPPONENT_DISTANCE_COLUMNS = [FEATURE_INDEX[f"opponent_{i}_distance"] for i in (1, 2, 3)]


class AnnotatorProfile(BaseModel):
    """Parameters of one synthetic annotator."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    gain: float = 1.0
    bias: float = 0.0
    smoothing_s: float = Field(1.5, gt=0)
    noise: float = Field(0.05, ge=0)
    drift: float = 0.0

    # Stimulus composition
    speed_weight: float = 0.5
    proximity_weight: float = 0.3
    crash_weight: float = 1.0
    crash_decay_s: float = Field(1.0, gt=0)
    proximity_range_m: float = Field(30.0, gt=0)


def stimulus(session: PlaySession, profile: AnnotatorProfile, window_s: float = 0.25,
             v_max: float = 28.0) -> np.ndarray:
    """Per-window stimulus: weighted speed, opponent closeness and a decaying crash impulse."""
    speed = session.column("speed") / v_max
    nearest = np.min(session.features[:, OPPONENT_DISTANCE_COLUMNS], axis=1)
    closeness = np.clip(1.0 - nearest / profile.proximity_range_m, 0.0, 1.0)

    crashed = session.column("crashed") > 0.5
    decay = math.exp(-window_s / profile.crash_decay_s)
    impulse = np.zeros(len(session))
    level = 0.0
    for i, hit in enumerate(crashed):
        level = 1.0 if hit else level * decay
        impulse[i] = level

    return (
        profile.speed_weight * speed
        + profile.proximity_weight * closeness
        + profile.crash_weight * impulse
    )


def annotate_arousal(session: PlaySession, profile: AnnotatorProfile, seed: int,
                     window_s: float = 0.25, v_max: float = 28.0) -> np.ndarray:
    """Unbounded arousal trace: smoothed(gain * stimulus + bias + drift * t + noise)."""
    n = len(session)
    if n == 0:
        raise ValueError(f"session {session.session_id} is empty")
    rng = np.random.default_rng(seed)
    t = np.arange(n) * window_s
    noise = profile.noise * rng.standard_normal(n) if profile.noise > 0 else np.zeros(n)
    raw = profile.gain * stimulus(session, profile, window_s, v_max) + profile.bias + profile.drift * t + noise

    alpha = window_s / (profile.smoothing_s + window_s)
    out = np.empty(n)
    level = raw[0]
    for i, x in enumerate(raw):
        level += alpha * (x - level)
        out[i] = level
    return out
