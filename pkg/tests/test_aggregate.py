import numpy as np
import pytest

from goblend.env.features import FEATURE_INDEX
from goblend.errors import ClusteringError
from goblend.personas.aggregate import AGGREGATE_FIELDS, aggregate, aggregate_matrix, standardize
from tests.conftest import make_session


def test_aggregate_fields():
    session = make_session("a", 80, seed=0, final_score=16)
    session.features[:, FEATURE_INDEX["crashed"]] = 0.0
    vec = aggregate(session)
    assert len(vec) == len(AGGREGATE_FIELDS)
    fields = dict(zip(AGGREGATE_FIELDS, vec))
    assert fields["max_score"] == 16
    assert fields["crash_windows"] == 0
    assert fields["length"] == 80


def test_identical_sessions_give_identical_vectors():
    a = make_session("a", 50, seed=3)
    b = make_session("b", 50, seed=3)
    assert np.array_equal(aggregate(a), aggregate(b))


def test_empty_session_is_rejected():
    session = make_session("a", 10, seed=0)
    empty = type(session)("e", session.features[:0], session.actions[:0], session.arousal[:0])
    with pytest.raises(ClusteringError):
        aggregate(empty)


def test_standardize_gives_zero_mean_unit_variance(random_dataset):
    z = standardize(aggregate_matrix(list(random_dataset)))
    varying = z.std(axis=0) > 0
    assert np.allclose(z.mean(axis=0), 0.0)
    assert np.allclose(z.std(axis=0)[varying], 1.0)


def test_standardize_rejects_nan():
    with pytest.raises(ClusteringError):
        standardize(np.array([[1.0, np.nan], [2.0, 3.0]]))
