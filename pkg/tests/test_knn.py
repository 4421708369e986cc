import numpy as np
import pytest
from sklearn.neighbors import KDTree

from goblend.affect.knn import (
    AffectConfig,
    AffectIndex,
    Weighting,
    brute_force_neighbors,
    brute_force_oracle,
    build_index,
    estimate_arousal,
    neighbors,
    weighted_estimate,
)
from goblend.env.features import FEATURE_COUNT
from goblend.errors import AffectIndexError
from goblend.personas.persona import build_persona
from goblend.traces.session import normalize_trace


def raw_index(rows, arousal, k, weighting=Weighting.DUDANI, margin=8):
    rows = np.asarray(rows, dtype=float)
    return AffectIndex(
        rows=rows,
        arousal=np.asarray(arousal, dtype=float),
        mean=np.zeros(rows.shape[1]),
        scale=np.ones(rows.shape[1]),
        k=k,
        weighting=weighting,
        candidate_margin=margin,
        tree=KDTree(rows, leaf_size=2),
    )


def test_dudani_hand_computation():
    value = weighted_estimate(np.array([1.0, 2.0, 3.0]), np.array([0.9, 0.5, 0.1]), Weighting.DUDANI)
    assert value == pytest.approx(1.15 / 1.5)


def test_equal_distances_give_plain_mean():
    values = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    assert weighted_estimate(np.full(5, 2.0), values, Weighting.DUDANI) == pytest.approx(0.3)


def test_inverse_and_literal_weightings():
    d = np.array([1.0, 3.0])
    v = np.array([1.0, 0.0])
    assert weighted_estimate(d, v, Weighting.INVERSE_DISTANCE) == pytest.approx(0.75)
    assert weighted_estimate(d, v, Weighting.LITERAL_PROSE) == pytest.approx(0.25)


def test_exact_match_returns_matching_rows_mean():
    d = np.array([0.0, 0.0, 1.0])
    assert weighted_estimate(d, np.array([0.2, 0.4, 1.0]), Weighting.INVERSE_DISTANCE) == pytest.approx(0.3)


def test_k1_returns_nearest_arousal():
    index = raw_index([[0.0, 0.0], [5.0, 0.0], [0.0, 9.0]], [0.1, 0.6, 0.9], k=1)
    assert estimate_arousal(index, np.array([4.0, 1.0])) == 0.6


def test_distance_ties_resolve_by_row_index():
    rows = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [3.0, 3.0]]
    index = raw_index(rows, [0.0, 0.25, 0.5, 0.75, 1.0], k=2, margin=0)
    picked, dist = neighbors(index, np.zeros(2))
    assert list(picked) == [0, 1]
    assert np.array_equal(dist, [1.0, 1.0])


def test_tree_search_agrees_with_brute_force():
    rng = np.random.default_rng(0)
    rows = np.round(rng.normal(size=(400, 5)), 1)
    index = raw_index(rows, rng.random(400), k=5, margin=3)
    for _ in range(1000):
        query = np.round(rng.normal(size=5), 1)
        tree_rows, _ = neighbors(index, query)
        brute_rows, _ = brute_force_neighbors(index, query)
        assert np.array_equal(tree_rows, brute_rows)
        assert estimate_arousal(index, query) == brute_force_oracle(index, query)


def test_estimates_stay_in_unit_interval():
    rng = np.random.default_rng(1)
    index = raw_index(rng.normal(size=(50, 3)), rng.random(50), k=5, weighting=Weighting.LITERAL_PROSE)
    for _ in range(100):
        assert 0.0 <= estimate_arousal(index, rng.normal(size=3) * 4) <= 1.0


def test_build_index_uses_member_sessions_only(random_dataset):
    members = [random_dataset["s01"], random_dataset["s03"]]
    persona = build_persona(members, "p")
    index = build_index(random_dataset, persona, AffectConfig(k=3))
    assert len(index) == len(members[0]) + len(members[1])
    assert np.array_equal(index.arousal[: len(members[0])], normalize_trace(members[0].arousal))
    assert index.rows.shape[1] == FEATURE_COUNT


def test_member_window_is_an_exact_match(random_dataset):
    session = random_dataset["s02"]
    persona = build_persona([session], "p")
    index = build_index(random_dataset, persona, AffectConfig(k=5))
    assert estimate_arousal(index, session.features[7]) == pytest.approx(session.arousal[7])


def test_rebuild_is_identical(random_dataset):
    persona = build_persona([random_dataset["s00"]], "p")
    a = build_index(random_dataset, persona)
    b = build_index(random_dataset, persona)
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.arousal, b.arousal)


def test_too_few_rows_for_k(random_dataset):
    persona = build_persona([random_dataset["s00"]], "p")
    with pytest.raises(AffectIndexError):
        build_index(random_dataset, persona, AffectConfig(k=1000))


def test_persona_without_sessions(random_dataset):
    persona = build_persona([random_dataset["s00"]], "p")
    persona.member_ids = ["elsewhere"]
    with pytest.raises(AffectIndexError):
        build_index(random_dataset, persona)


@pytest.mark.parametrize("name", ["dudani", "inverse-distance", "literal-prose"])
def test_weighting_names_are_accepted(name):
    assert AffectConfig(weighting=name).weighting is Weighting(name)
