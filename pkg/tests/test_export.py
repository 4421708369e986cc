import json

import pandas as pd
import pytest

from goblend.harness.experiments import ExperimentResult, SeedRun
from goblend.harness.export import export, load_results, rewards_frame, summary_frame
from goblend.harness.stats import InGameStatistics


def run(seed, score, lap1=None, rewards=None):
    stats = InGameStatistics(
        final_score=score,
        lap1_time_s=lap1,
        average_speed=10.0 + seed,
        nearest_car=120.5 - seed,
        offroad_pct=2.5 * seed,
        crash_pct=0.25,
        length=400 + seed,
    )
    return SeedRun(seed, [(0, 1), (1, 1)], stats, rewards or {})


@pytest.fixture
def results():
    rewards = {"expert": (0.9, 0.6), "beginner": (0.4, 0.7)}
    return [
        ExperimentResult("random", "random", None, None, [run(s, 0, rewards=rewards) for s in (0, 1, 2)]),
        ExperimentResult("expert_l0.5", "persona", "expert", 0.5,
                         [run(s, 16, lap1=40.0 + s, rewards=rewards) for s in (0, 1, 2)]),
    ]


def test_export_writes_table_rewards_and_runs(tmp_path, results):
    export(results, tmp_path, config={"seed": 1})
    table = pd.read_csv(tmp_path / "table.csv")
    assert list(table["experiment"]) == ["random", "expert_l0.5"]
    assert table.loc[1, "final_score"] == 16
    assert pd.isna(table.loc[0, "lap1_time_s"])
    assert len(pd.read_csv(tmp_path / "rewards.csv")) == 12
    payload = json.loads((tmp_path / "runs" / "expert_l0.5.json").read_text(encoding="utf-8"))
    assert payload["seeds"] == [0, 1, 2]
    assert payload["config"] == {"seed": 1}


def test_reimport_recomputes_identical_aggregates(tmp_path, results):
    export(results, tmp_path)
    loaded = load_results(tmp_path)
    assert [r.experiment_id for r in loaded] == ["random", "expert_l0.5"]
    pd.testing.assert_frame_equal(summary_frame(loaded), summary_frame(results))
    pd.testing.assert_frame_equal(rewards_frame(loaded), rewards_frame(results))


def test_unwritable_destination(tmp_path, results):
    blocker = tmp_path / "file"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OSError):
        export(results, blocker / "out")


def test_unknown_result_format(tmp_path, results):
    export(results, tmp_path)
    (tmp_path / "runs" / "random.json").write_text(json.dumps({"format": "other"}), encoding="utf-8")
    with pytest.raises(ValueError):
        load_results(tmp_path)
