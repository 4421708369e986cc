import numpy as np
import pytest

from goblend.env.features import FEATURE_COUNT, FEATURE_INDEX
from goblend.env.racing import RacingEnv
from goblend.env.track import load_track
from goblend.traces.generator import GeneratorConfig, SkillTier, generate_cohort
from goblend.traces.session import PlaySession, PlaytraceDataset, normalize_trace


@pytest.fixture(scope="session")
def layout():
    return load_track()


@pytest.fixture
def env(layout):
    return RacingEnv(layout)


def make_session(session_id: str, n: int, seed: int, final_score: int = 16, tier_hint=None) -> PlaySession:
    """Random but well-formed session with a non-decreasing score column."""
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(n, FEATURE_COUNT))
    features[:, FEATURE_INDEX["score"]] = np.floor(np.linspace(0, final_score, n))
    features[:, FEATURE_INDEX["speed"]] = rng.uniform(0, 28, n)
    features[:, FEATURE_INDEX["on_grass"]] = rng.random(n) < 0.1
    features[:, FEATURE_INDEX["crashed"]] = rng.random(n) < 0.05
    features[:, FEATURE_INDEX["nearest_visible_opponent"]] = rng.uniform(0, 500, n)
    for i in (1, 2, 3):
        features[:, FEATURE_INDEX[f"opponent_{i}_distance"]] = rng.uniform(0, 100, n)
    actions = rng.integers(-1, 2, size=(n, 2))
    return PlaySession(
        session_id=session_id,
        features=features,
        actions=actions,
        arousal=normalize_trace(rng.random(n)),
        tier_hint=tier_hint,
        seed=seed,
    )


@pytest.fixture
def random_dataset():
    return PlaytraceDataset([make_session(f"s{i:02d}", 40 + 7 * i, seed=i) for i in range(6)])


@pytest.fixture(scope="session")
def tiny_cohort(layout):
    config = GeneratorConfig(cohort={tier: 2 for tier in SkillTier}, seed=7)
    return generate_cohort(config, layout)
