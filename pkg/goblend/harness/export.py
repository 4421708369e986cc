"""Result exports: summary table, reward comparison and per-seed JSON."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from goblend.harness.experiments import ExperimentResult, SeedRun
from goblend.harness.stats import STAT_FIELDS

logger = logging.getLogger(__name__)

RESULT_FORMAT = "goblend-result/1"


def summary_frame(results: List[ExperimentResult]) -> pd.DataFrame:
    """One row per experiment: mean and CI half-width of each statistic."""
    rows = []
    for result in results:
        row: Dict[str, Any] = {
            "experiment": result.experiment_id,
            "kind": result.kind,
            "persona": result.persona or "",
            "lambda": "" if result.lam is None else result.lam,
            "seeds": " ".join(str(s) for s in result.seeds),
        }
        summary = result.summary()
        for name in STAT_FIELDS + ["r_b", "r_e"]:
            mean, ci = summary.get(name, (None, None))
            row[name] = mean
            row[f"{name}_ci"] = ci
        rows.append(row)
    return pd.DataFrame(rows)


def rewards_frame(results: List[ExperimentResult]) -> pd.DataFrame:
    """Long format: every run's rewards against every persona."""
    rows = []
    for result in results:
        for run in result.runs:
            for target, (r_b, r_e) in run.rewards.items():
                rows.append({
                    "experiment": result.experiment_id,
                    "seed": run.seed,
                    "target_persona": target,
                    "r_b": r_b,
                    "r_e": r_e,
                })
    return pd.DataFrame(rows, columns=["experiment", "seed", "target_persona", "r_b", "r_e"])


def export(results: List[ExperimentResult], out_dir: Union[str, Path],
           config: Optional[dict] = None) -> Path:
    """Write table.csv, rewards.csv and runs/<experiment>.json."""
    out_dir = Path(out_dir)
    runs_dir = out_dir / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    summary_frame(results).to_csv(out_dir / "table.csv", index=False)
    rewards_frame(results).to_csv(out_dir / "rewards.csv", index=False)
    for result in results:
        payload = {
            "format": RESULT_FORMAT,
            "experiment": result.experiment_id,
            "kind": result.kind,
            "persona": result.persona,
            "lambda": result.lam,
            "seeds": result.seeds,
            "config": config or {},
            "runs": [run.to_dict() for run in result.runs],
        }
        (runs_dir / f"{result.experiment_id}.json").write_text(json.dumps(payload, indent=1), encoding="utf-8")
    logger.info("Exported %d experiments to %s", len(results), out_dir)
    return out_dir


def load_results(out_dir: Union[str, Path]) -> List[ExperimentResult]:
    """Rebuild results from the per-seed JSON files; aggregates are recomputed, not read."""
    runs_dir = Path(out_dir) / "runs"
    results = []
    for path in sorted(runs_dir.glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("format") != RESULT_FORMAT:
            raise ValueError(f"{path}: unknown result format {data.get('format')!r}")
        results.append(ExperimentResult(
            experiment_id=data["experiment"],
            kind=data["kind"],
            persona=data["persona"],
            lam=data["lambda"],
            runs=[SeedRun.from_dict(r) for r in data["runs"]],
        ))
    order = {}
    table = Path(out_dir) / "table.csv"
    if table.exists():
        order = {name: i for i, name in enumerate(pd.read_csv(table)["experiment"].astype(str))}
    results.sort(key=lambda r: order.get(r.experiment_id, len(order)))
    return results
