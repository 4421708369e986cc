import json

import numpy as np
import pytest

from goblend.errors import ClusteringError, PersonaNotFoundError
from goblend.personas.persona import (
    ClusterConfig,
    PersonaModel,
    build_persona,
    discover_personas,
    hold_at_final,
    load_persona,
    load_personas,
    save_personas,
)
from goblend.traces.session import PlaytraceDataset, normalize_trace
from tests.conftest import make_session


def test_hold_at_final():
    assert np.array_equal(hold_at_final([0.1, 0.4], 5), [0.1, 0.4, 0.4, 0.4, 0.4])
    assert np.array_equal(hold_at_final(np.arange(6.0), 3), [0.0, 1.0, 2.0])


def test_single_member_persona_equals_member():
    session = make_session("solo", 300, seed=4)
    persona = build_persona([session], "solo")
    assert persona.member_count == 1
    assert np.allclose(persona.score_trace, hold_at_final(session.scores, 480) / 16)
    assert np.allclose(persona.arousal_trace, hold_at_final(normalize_trace(session.arousal), 480))
    assert persona.score_trace.shape == persona.arousal_trace.shape == (480,)


def test_finished_members_hold_full_score():
    sessions = [make_session(f"m{i}", 250 + 20 * i, seed=i, final_score=16) for i in range(3)]
    persona = build_persona(sessions, "fast")
    assert np.all(persona.score_trace[300:] == 1.0)
    assert np.all(np.diff(persona.score_trace) >= 0)


def test_action_table_sums_to_one(random_dataset):
    persona = build_persona(list(random_dataset), "all")
    assert persona.action_table.probabilities.sum() == pytest.approx(1.0)


def test_empty_persona_is_rejected():
    with pytest.raises(ClusteringError):
        build_persona([], "nobody")


def test_discover_ranks_by_final_score():
    fast = [make_session(f"fast{i}", 200, seed=0, final_score=16) for i in range(4)]
    slow = [make_session(f"slow{i}", 480, seed=1, final_score=3) for i in range(4)]
    result = discover_personas(PlaytraceDataset(fast + slow), ClusterConfig(n_personas=2, labels=["top", "bottom"]))
    by_label = result.by_label()
    assert set(by_label) == {"top", "bottom"}
    assert set(by_label["top"].member_ids) == {s.session_id for s in fast}
    assert by_label["top"].mean_final_score == 16
    assert result.assignments["slow2"] == "bottom"
    assert result.cut_threshold > 0


def test_discover_needs_two_sessions():
    with pytest.raises(ClusteringError):
        discover_personas(PlaytraceDataset([make_session("a", 10, seed=0)]))


def test_persona_json_round_trip(tmp_path, random_dataset):
    persona = build_persona(list(random_dataset), "expert", cut_threshold=5.5)
    save_personas([persona], tmp_path)
    data = json.loads((tmp_path / "persona_expert.json").read_text(encoding="utf-8"))
    assert data["member_count"] == 6
    assert len(data["score_trace"]) == 480

    loaded = load_persona(tmp_path, "expert")
    assert loaded.member_ids == persona.member_ids
    assert np.array_equal(loaded.score_trace, persona.score_trace)
    assert np.array_equal(loaded.arousal_trace, persona.arousal_trace)
    assert np.array_equal(loaded.action_table.probabilities, persona.action_table.probabilities)
    assert loaded.cut_threshold == 5.5
    assert set(load_personas(tmp_path)) == {"expert"}


def test_missing_persona(tmp_path):
    with pytest.raises(PersonaNotFoundError):
        load_persona(tmp_path, "expert")


def test_unknown_persona_format():
    with pytest.raises(ValueError):
        PersonaModel.from_dict({"format": "other"})
