from dataclasses import replace

import numpy as np
import pytest

from goblend.env.features import (
    FEATURE_COUNT,
    FEATURE_INDEX,
    FEATURE_NAMES,
    checkpoint_progress,
    nearest_visible_opponent,
)


def test_feature_vector_shape(env):
    vec = env.features(env.reset(0))
    assert FEATURE_COUNT == len(FEATURE_NAMES) == 24
    assert vec.shape == (24,)
    assert np.all(np.isfinite(vec))


def test_features_reflect_state(env):
    state = env.replay(0, [(0, 1)] * 12)
    vec = env.features(state)
    assert vec[FEATURE_INDEX["speed"]] == state.player.speed
    assert vec[FEATURE_INDEX["gas_input"]] == 1.0
    assert vec[FEATURE_INDEX["score"]] == state.score
    assert vec[FEATURE_INDEX["speed_delta"]] == pytest.approx(state.player.speed - state.prev_speed)
    assert 0.0 <= vec[FEATURE_INDEX["checkpoint_progress"]] <= 1.0


def test_opponent_behind_is_not_visible(env):
    state = env.reset(0)
    player = state.player
    behind = tuple(replace(o, x=player.x - 20.0 * np.cos(player.heading),
                           y=player.y - 20.0 * np.sin(player.heading)) for o in state.opponents)
    assert nearest_visible_opponent(replace(state, opponents=behind), 60.0, 500.0) == 500.0


def test_opponent_ahead_is_visible(env):
    state = env.reset(0)
    player = state.player
    ahead = replace(state.opponents[0], x=player.x + 10.0 * np.cos(player.heading),
                    y=player.y + 10.0 * np.sin(player.heading))
    far = tuple(replace(o, x=player.x + 1000.0, y=player.y + 1000.0) for o in state.opponents[1:])
    assert nearest_visible_opponent(replace(state, opponents=(ahead,) + far), 60.0, 500.0) == pytest.approx(10.0)


def test_checkpoint_progress_in_unit_interval(env):
    for state in env.rollout(0, [(0, 1)] * 60):
        assert 0.0 <= checkpoint_progress(state, env) <= 1.0
