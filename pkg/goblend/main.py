"""Goblend - command line entry point."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from goblend.affect.knn import Weighting, build_index, estimate_arousal
from goblend.config import GoblendConfig
from goblend.env.racing import RacingEnv
from goblend.errors import PersonaNotFoundError
from goblend.explore.explorer import run_exploration
from goblend.harness.experiments import SeedRun, run_matrix
from goblend.harness.export import export, load_results, rewards_frame, summary_frame
from goblend.harness.render import render_trace, trajectory_positions
from goblend.harness.stats import compute_stats
from goblend.personas.persona import discover_personas, load_persona, load_personas, save_personas
from goblend.personas.ward import export_merges
from goblend.traces.generator import generate_cohort
from goblend.traces.playtrace_csv import load_sessions, save_sessions
from goblend.utils.log_setup import setup_logging

logger = logging.getLogger(__name__)

PLAYTRACES = "playtraces.csv"
PERSONAS = "personas"


class Goblend:
    """Runs one CLI command against a loaded configuration."""

    def __init__(self, config: GoblendConfig):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self._env: Optional[RacingEnv] = None

    @property
    def env(self) -> RacingEnv:
        if self._env is None:
            self._env = RacingEnv(config=self.config.env)
        return self._env

    def data_path(self, args) -> Path:
        return Path(args.data) if args.data else self.output_dir / PLAYTRACES

    def personas_dir(self, args) -> Path:
        return Path(args.personas) if args.personas else self.output_dir / PERSONAS

    # ==================== COMMANDS ====================

    def generate(self, args) -> int:
        out = Path(args.out) if args.out else self.output_dir / PLAYTRACES
        dataset = generate_cohort(self.config.generator, self.env.layout, self.config.env)
        save_sessions(dataset, out)
        self.config.write_resolved(out.parent)
        return 0

    def cluster(self, args) -> int:
        dataset = load_sessions(self.data_path(args))
        out = Path(args.out) if args.out else self.personas_dir(args)
        result = discover_personas(dataset, self.config.cluster)
        # Resolved config carries the threshold actually used
        self.config.cluster = self.config.cluster.model_copy(update={"cut_threshold": result.cut_threshold})
        save_personas(result.personas, out)
        export_merges(result.dendrogram, out / "dendrogram.csv")
        pd.DataFrame(
            sorted(result.assignments.items()), columns=["session_id", "persona"]
        ).to_csv(out / "assignments.csv", index=False)
        self.config.write_resolved(out)
        logger.info("Cut threshold %.4f gave %d personas", result.cut_threshold, len(result.personas))
        return 0

    def explore(self, args) -> int:
        dataset = load_sessions(self.data_path(args))
        exploration = self.config.harness.exploration
        updates = {"objective": args.objective}
        for name, value in (("lam", args.lam), ("seed", args.seed), ("iterations", args.iterations)):
            if value is not None:
                updates[name] = value
        exploration = type(exploration).model_validate({**exploration.model_dump(), **updates})
        affect_updates = {name: value for name, value in (("k", args.k), ("weighting", args.weighting)) if value is not None}
        affect = type(self.config.affect).model_validate({**self.config.affect.model_dump(), **affect_updates})
        self.config.affect = affect

        persona = None
        if exploration.objective == "blend":
            if not args.persona:
                raise ValueError("--persona is required unless --objective score")
            persona = load_persona(self.personas_dir(args), args.persona)

        run_id = args.persona or "winner"
        out = Path(args.out) if args.out else self.output_dir / "explore" / f"{run_id}_l{exploration.lam:g}_s{exploration.seed}"
        index = None
        if persona is not None:
            index = build_index(dataset, persona, affect)
        archive, best = run_exploration(
            exploration, persona, dataset, self.env, index, progress_path=out / "progress.csv",
        )
        archive.dump(out / "archive")
        stats = compute_stats(best.actions, self.env, exploration.seed, best.trajectory.h_b)
        run = SeedRun(exploration.seed, list(best.actions), stats,
                      {persona.label: (best.r_b, best.r_e)} if persona else {})
        (out / "best.json").write_text(json.dumps({
            "key": best.key.as_row(),
            "r_b": best.r_b,
            "r_e": best.r_e,
            "r_lambda": best.r_lambda,
            **run.to_dict(),
        }, indent=1), encoding="utf-8")
        self.config.write_resolved(out)
        return 0

    def matrix(self, args) -> int:
        dataset = load_sessions(self.data_path(args))
        personas = load_personas(self.personas_dir(args))
        out = Path(args.out) if args.out else self.output_dir / "matrix"
        results = run_matrix(self.config.harness, dataset, personas, self.env, self.config.affect)
        export(results, out, self.config.to_dict())
        self.config.write_resolved(out)
        return 0

    def report(self, args) -> int:
        results_dir = Path(args.results) if args.results else self.output_dir / "matrix"
        results = load_results(results_dir)
        if not results:
            raise ValueError(f"no results under {results_dir}")
        table = summary_frame(results)
        table.to_csv(results_dir / "table.csv", index=False)
        rewards_frame(results).to_csv(results_dir / "rewards.csv", index=False)
        with pd.option_context("display.width", 200, "display.max_columns", 40):
            logger.info("Results\n%s", table.to_string(index=False))
        return 0

    def render(self, args) -> int:
        results_dir = Path(args.results) if args.results else self.output_dir / "matrix"
        results = {r.experiment_id: r for r in load_results(results_dir)}
        if args.experiment not in results:
            raise ValueError(f"unknown experiment {args.experiment!r}; have {sorted(results)}")
        result = results[args.experiment]
        runs = [r for r in result.runs if args.seed is None or r.seed == args.seed]
        if not runs:
            raise ValueError(f"experiment {args.experiment} has no run for seed {args.seed}")
        run = runs[0]

        label = args.persona or result.persona
        if not label:
            raise PersonaNotFoundError("baseline runs need --persona to color by arousal")
        persona = load_persona(self.personas_dir(args), label)
        index = build_index(load_sessions(self.data_path(args)), persona, self.config.affect)
        states = self.env.rollout(run.seed, run.actions)
        arousal = np.array([estimate_arousal(index, self.env.features(s)) for s in states])
        positions = trajectory_positions(run.actions, self.env, run.seed)
        out = Path(args.out) if args.out else results_dir / "render" / f"{args.experiment}_s{run.seed}.svg"
        render_trace(positions, arousal, self.env.layout, out)
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goblend", description="Persona imitation through archive-based exploration")
    parser.add_argument("--config", help="JSON config file (default: $GOBLEND_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate the synthetic playtrace cohort")
    p.add_argument("--out", help="playtrace CSV to write")

    p = sub.add_parser("cluster", help="discover personas from playtraces")
    p.add_argument("--data", help="playtrace CSV")
    p.add_argument("--personas", help="persona directory to read")
    p.add_argument("--out", help="persona directory to write")

    p = sub.add_parser("explore", help="run a single exploration")
    p.add_argument("--data", help="playtrace CSV")
    p.add_argument("--personas", help="persona directory")
    p.add_argument("--persona", help="persona label to imitate")
    p.add_argument("--lambda", dest="lam", type=float, help="arousal weight in [0, 1]")
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--k", type=int, help="nearest neighbors for arousal")
    p.add_argument("--weighting", choices=[w.value for w in Weighting])
    p.add_argument("--objective", choices=["blend", "score"], default="blend")
    p.add_argument("--out", help="run directory")

    p = sub.add_parser("matrix", help="run the full experiment matrix")
    p.add_argument("--data", help="playtrace CSV")
    p.add_argument("--personas", help="persona directory")
    p.add_argument("--out", help="results directory")

    p = sub.add_parser("report", help="recompute tables from exported results")
    p.add_argument("--results", help="results directory")

    p = sub.add_parser("render", help="render a result trajectory as SVG")
    p.add_argument("experiment", help="experiment id, e.g. expert_l0.5 or winner")
    p.add_argument("--results", help="results directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--persona", help="persona whose arousal model colors the trace")
    p.add_argument("--data", help="playtrace CSV")
    p.add_argument("--personas", help="persona directory")
    p.add_argument("--out", help="SVG file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        config = GoblendConfig.load(args.config)
        setup_logging(config.log_level, config.log_json)
        app = Goblend(config)
        return getattr(app, args.command)(args)

    except PersonaNotFoundError as e:
        logger.error("Persona error: %s", e)
        logger.info("Run 'goblend cluster' first to write persona artifacts")
        return 2
    except ValueError as e:
        logger.error("Configuration error: %s", e)
        return 2
    except Exception as e:
        logger.exception("Fatal error: %s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
