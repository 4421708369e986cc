import math
from dataclasses import replace

import pytest

from goblend.env import cells
from goblend.env.cells import (
    CellKey,
    SpeedBucket,
    enumerate_cell_keys,
    key_space_size,
    lap_key_space_size,
    rotation_bucket,
)


def test_start_state_cell(env):
    key = env.discretize(env.reset(0))
    assert key.lap == 1
    assert key.speed_bucket is SpeedBucket.SLOW
    assert key.rotation_bucket == 2
    assert key.sub_segment in range(4)


@pytest.mark.parametrize(
    "degrees, bucket",
    [(-89.0, 0), (-61.0, 0), (-59.0, 1), (-0.1, 2), (0.0, 2), (0.1, 3), (59.0, 4), (89.9, 5), (120.0, 5), (-170.0, 0)],
)
def test_rotation_buckets(degrees, bucket):
    assert rotation_bucket(math.radians(degrees)) == bucket


def test_speed_bucket_threshold_is_half_v_max(env):
    state = env.reset(0)
    half = env.config.v_max / 2.0
    slow = replace(state, player=replace(state.player, speed=half - 1e-9))
    fast = replace(state, player=replace(state.player, speed=half))
    assert env.discretize(slow).speed_bucket is SpeedBucket.SLOW
    assert env.discretize(fast).speed_bucket is SpeedBucket.FAST


def test_proximity_flag_tracks_shared_sub_segment(env):
    state = env.reset(0)
    player = state.player
    on_top = replace(state.opponents[0], x=player.x, y=player.y)
    near = replace(state, opponents=(on_top,) + state.opponents[1:])
    assert env.discretize(near).proximity

    far_away = tuple(replace(o, x=player.x + 500.0, y=player.y + 500.0) for o in state.opponents)
    assert not env.discretize(replace(state, opponents=far_away)).proximity


def test_off_playfield_state_is_snapped_and_counted(env):
    state = env.reset(0)
    lost = replace(state, player=replace(state.player, x=10_000.0, y=10_000.0), off_playfield=True)
    before = cells.diagnostics["off_playfield"]
    key = env.discretize(lost)
    assert cells.diagnostics["off_playfield"] == before + 1
    assert 0 <= key.sub_segment < env.layout.sub_segment_count


def test_key_space(layout):
    assert key_space_size(layout) == 3648
    assert lap_key_space_size(layout) == 1824
    keys = list(enumerate_cell_keys(layout))
    assert len(keys) == len(set(keys)) == 3648


def test_cell_keys_are_values():
    a = CellKey(1, 5, SpeedBucket.FAST, 3, False)
    b = CellKey(1, 5, SpeedBucket.FAST, 3, False)
    assert a == b and hash(a) == hash(b)
    assert CellKey(1, 4, SpeedBucket.FAST, 3, False) < a
    assert a.as_row() == {"lap": 1, "sub_segment": 5, "speed_bucket": "fast", "rotation_bucket": 3, "proximity": 0}


def test_every_visited_cell_is_in_key_space(env):
    keys = set(enumerate_cell_keys(env.layout))
    for state in env.rollout(2, [(1, 1)] * 40 + [(0, 1)] * 80):
        assert env.discretize(state) in keys
