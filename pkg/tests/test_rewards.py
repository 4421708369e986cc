import numpy as np
import pytest

from goblend.errors import RewardInputError
from goblend.explore.rewards import SimilarityAccumulator, blend, reward_similarity


def naive_similarity(h, t):
    total = 0.0
    for i, value in enumerate(h):
        target = t[min(i, len(t) - 1)]
        total += (1.0 - abs(value - target)) ** 2
    return total / len(h)


def test_perfect_match_is_one():
    trace = np.linspace(0.0, 1.0, 50)
    assert reward_similarity(trace, trace) == 1.0


def test_single_window():
    assert reward_similarity([0.5], [1.0]) == 0.25


def test_maximal_deviation_is_zero():
    assert reward_similarity([0.0, 1.0], [1.0, 0.0]) == 0.0


def test_target_is_held_past_its_end():
    assert reward_similarity([1.0, 1.0, 1.0], [0.0, 1.0]) == pytest.approx(2.0 / 3.0)


def test_matches_naive_summation():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        h = rng.random(int(rng.integers(1, 60)))
        t = rng.random(int(rng.integers(1, 60)))
        assert reward_similarity(h, t) == pytest.approx(naive_similarity(h, t), abs=1e-12)


def test_incremental_accumulation_is_bit_identical():
    rng = np.random.default_rng(1)
    h = rng.random(40)
    t = rng.random(30)
    acc = SimilarityAccumulator(t)
    for value in h[:15]:
        acc.add(float(value))
    resumed = SimilarityAccumulator(t, acc.total, acc.count)
    for value in h[15:]:
        resumed.add(float(value))
    assert resumed.value == reward_similarity(h, t)


@pytest.mark.parametrize("h, t", [([], [0.5]), ([0.5], []), ([1.5], [0.5]), ([0.5], [-0.1]), ([np.nan], [0.5])])
def test_bad_traces_are_rejected(h, t):
    with pytest.raises(RewardInputError):
        reward_similarity(h, t)


def test_empty_accumulator_has_no_value():
    with pytest.raises(RewardInputError):
        SimilarityAccumulator([0.5]).value


def test_blend():
    assert blend(0.8, 0.6, 0.0) == 0.6
    assert blend(0.8, 0.6, 1.0) == 0.8
    assert blend(0.8, 0.6, 0.5) == pytest.approx(0.7)


@pytest.mark.parametrize("args", [(1.2, 0.5, 0.5), (0.5, -0.1, 0.5), (0.5, 0.5, 2.0)])
def test_blend_rejects_out_of_range(args):
    with pytest.raises(RewardInputError):
        blend(*args)
