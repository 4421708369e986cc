import numpy as np
import pytest

from goblend.affect.knn import build_index
from goblend.errors import ReplayDivergenceError
from goblend.harness.stats import compare_rewards, compute_stats
from goblend.personas.persona import build_persona


def test_stationary_run(env):
    stats = compute_stats([(0, 0)] * 40, env, seed=0)
    assert stats.final_score == 0
    assert stats.average_speed == 0.0
    assert stats.offroad_pct == 0.0
    assert stats.lap1_time_s is None
    assert stats.length == 40


def test_empty_action_log(env):
    stats = compute_stats([], env, seed=0)
    assert stats.length == 0 and stats.final_score == 0


def test_replay_reproduces_generated_session(env, tiny_cohort):
    session = tiny_cohort["expert-000"]
    stats = compute_stats(session.actions.tolist(), env, session.seed)
    assert stats.final_score == session.final_score
    assert stats.length == len(session)
    reached = np.flatnonzero(session.scores >= 8)
    if reached.size:
        assert stats.lap1_time_s == (reached[0] + 1) / 4
    assert stats.average_speed == pytest.approx(session.column("speed").mean())
    assert stats.offroad_pct == pytest.approx(100.0 * session.column("on_grass").mean())


def test_cached_score_trace_must_match(env):
    actions = [(0, 1)] * 10
    compute_stats(actions, env, 0, expected_h_b=[0.0] * 10)
    with pytest.raises(ReplayDivergenceError):
        compute_stats(actions, env, 0, expected_h_b=[0.0] * 9 + [0.5])


def test_member_play_matches_its_own_persona(env, tiny_cohort):
    session = tiny_cohort["advanced-001"]
    persona = build_persona([session], "solo")
    index = build_index(tiny_cohort, persona)
    r_b, r_e = compare_rewards(session.actions.tolist(), persona, env, session.seed, index)
    assert r_b == 1.0
    assert r_e == pytest.approx(1.0)
