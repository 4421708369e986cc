import numpy as np
import pytest

from goblend.traces.generator import GeneratorConfig, SkillTier, generate_cohort, generate_session


def test_generate_session_is_deterministic(layout):
    a = generate_session(layout, SkillTier.EXPERT, seed=17)
    b = generate_session(layout, SkillTier.EXPERT, seed=17)
    assert a == b


def test_generated_sessions_are_well_formed(tiny_cohort):
    assert len(tiny_cohort) == 8
    assert tiny_cohort.session_ids[:2] == ["expert-000", "expert-001"]
    for session in tiny_cohort:
        assert 0 < len(session) <= 480
        assert session.arousal.min() >= 0.0 and session.arousal.max() <= 1.0
        assert np.all(np.diff(session.scores) >= 0)
        assert session.final_score <= 16
        assert np.array_equal(session.column("steer_input"), session.actions[:, 0])
        assert np.array_equal(session.column("gas_input"), session.actions[:, 1])
        assert session.tier_hint in {t.value for t in SkillTier}


def test_tiers_drive_distinct_lines_and_speeds(tiny_cohort):
    order = [t.value for t in SkillTier]
    lateral = [np.mean([np.abs(s.column("lateral_offset")).mean() for s in tiny_cohort if s.tier_hint == t]) for t in order]
    speed = [np.mean([s.column("speed").mean() for s in tiny_cohort if s.tier_hint == t]) for t in order]
    assert lateral == sorted(lateral)
    assert speed == sorted(speed, reverse=True)


def test_cohort_seed_changes_sessions(layout, tiny_cohort):
    other = generate_cohort(GeneratorConfig(cohort={SkillTier.EXPERT: 1}, seed=8), layout)
    assert other["expert-000"] != tiny_cohort["expert-000"]


def test_cohort_counts_follow_config(layout):
    config = GeneratorConfig(cohort={SkillTier.BEGINNER: 1, SkillTier.EXPERT: 0}, seed=1)
    dataset = generate_cohort(config, layout)
    assert dataset.session_ids == ["beginner-000"]


def test_default_cohort_size():
    assert sum(GeneratorConfig().cohort.values()) == 108


@pytest.mark.slow
def test_experts_finish_faster_than_beginners(layout):
    config = GeneratorConfig(cohort={SkillTier.EXPERT: 6, SkillTier.BEGINNER: 6}, seed=3)
    dataset = generate_cohort(config, layout)
    lengths = {tier: [len(s) for s in dataset if s.tier_hint == tier] for tier in ("expert", "beginner")}
    scores = {tier: [s.final_score for s in dataset if s.tier_hint == tier] for tier in ("expert", "beginner")}
    assert np.mean(scores["expert"]) >= np.mean(scores["beginner"])
    assert np.mean(lengths["expert"]) < np.mean(lengths["beginner"])
