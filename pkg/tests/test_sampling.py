import numpy as np
import pytest

from goblend.explore.sampling import ACTIONS, ActionTable, action_frequencies, sample_action


def one_hot(index):
    p = np.zeros(len(ACTIONS))
    p[index] = 1.0
    return p


@pytest.mark.parametrize("index", [0, 4, 8])
def test_certain_action_is_always_drawn(index):
    rng = np.random.default_rng(0)
    assert {sample_action(one_hot(index), rng) for _ in range(200)} == {ACTIONS[index]}


def test_uniform_draws_are_balanced():
    rng = np.random.default_rng(1)
    table = ActionTable.uniform()
    draws = [table.draw(rng) for _ in range(9000)]
    counts = np.array([draws.count(a) for a in ACTIONS])
    sigma = np.sqrt(9000 * (1 / 9) * (8 / 9))
    assert np.all(np.abs(counts - 1000) < 4 * sigma)


def test_same_seed_same_sequence():
    table = ActionTable.uniform()
    rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
    assert [table.draw(rng1) for _ in range(50)] == [table.draw(rng2) for _ in range(50)]


@pytest.mark.parametrize("p", [np.full(9, 0.2), np.full(8, 1 / 8), np.r_[-0.1, 1.1, np.zeros(7)]])
def test_invalid_tables_are_rejected(p):
    with pytest.raises(ValueError):
        sample_action(p, np.random.default_rng(0))


def test_frequencies_from_sessions(random_dataset):
    table = action_frequencies(random_dataset)
    assert table.probabilities.sum() == pytest.approx(1.0)
    first = random_dataset["s00"]
    expected = np.mean([tuple(a) == (0, 1) for a in first.actions])
    solo = action_frequencies([first])
    assert solo.as_dict()["0,1"] == pytest.approx(expected)
