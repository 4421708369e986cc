"""Archive-based exploration: select a cell, return to it, explore, keep improvements."""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from goblend.affect.knn import AffectConfig, AffectIndex, build_index, estimate_arousal
from goblend.env.cells import key_space_size, lap_key_space_size
from goblend.env.racing import GameState, RacingEnv
from goblend.errors import ReplayDivergenceError
from goblend.explore.archive import EMPTY_TRAJECTORY, Archive, ArchiveEntry, Trajectory, select_cell
from goblend.explore.rewards import SimilarityAccumulator, blend
from goblend.explore.sampling import ActionTable, action_frequencies
from goblend.traces.session import PlaytraceDataset

logger = logging.getLogger(__name__)


class ExplorationConfig(BaseModel):
    """One exploration run."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    iterations: int = Field(50_000, ge=1)
    actions_per_iteration: int = Field(20, ge=1)
    lam: float = Field(0.0, ge=0, le=1, alias="lambda")
    seed: int = 0
    selection: Literal["uniform-random"] = "uniform-random"
    objective: Literal["blend", "score"] = "blend"
    workers: int = Field(1, ge=1)
    replay_check_every: int = Field(100, ge=1)
    progress_every: int = Field(1000, ge=1)
    stop_on_max_score: bool = False


# ==================== OBJECTIVES ====================


@dataclass
class Tracker:
    """Reward accumulators of the trajectory being extended."""
    acc_b: Optional[SimilarityAccumulator] = None
    acc_e: Optional[SimilarityAccumulator] = None

    @property
    def sums(self) -> Tuple[float, float]:
        return (
            self.acc_b.total if self.acc_b else 0.0,
            self.acc_e.total if self.acc_e else 0.0,
        )


class BlendObjective:
    """Imitate a persona's score and arousal traces, blended by lambda."""

    def __init__(self, persona, affect_index: AffectIndex, lam: float, max_score: int = 16):
        self.lam = lam
        self.max_score = max_score
        self.affect_index = affect_index
        # Constructing from arrays validates the targets once
        self._target_b = SimilarityAccumulator(np.asarray(persona.score_trace))._target
        self._target_e = SimilarityAccumulator(np.asarray(persona.arousal_trace))._target

    def begin(self, entry: Optional[ArchiveEntry] = None) -> Tracker:
        if entry is None:
            return Tracker(SimilarityAccumulator(self._target_b), SimilarityAccumulator(self._target_e))
        n = entry.length
        return Tracker(
            SimilarityAccumulator(self._target_b, entry.sum_b, n),
            SimilarityAccumulator(self._target_e, entry.sum_e, n),
        )

    def observe(self, tracker: Tracker, state: GameState, env: RacingEnv) -> Tuple[float, float]:
        h_b = state.score / self.max_score
        h_e = estimate_arousal(self.affect_index, env.features(state))
        tracker.acc_b.add(h_b)
        tracker.acc_e.add(h_e)
        return h_b, h_e

    def rewards(self, tracker: Tracker, state: GameState) -> Tuple[float, float, float]:
        r_b = tracker.acc_b.value
        r_e = tracker.acc_e.value
        return r_b, r_e, blend(r_e, r_b, self.lam)


class ScoreObjective:
    """Winner baseline: reward is the raw score over the maximum."""

    lam = 0.0

    def __init__(self, max_score: int = 16):
        self.max_score = max_score

    def begin(self, entry: Optional[ArchiveEntry] = None) -> Tracker:
        return Tracker()

    def observe(self, tracker: Tracker, state: GameState, env: RacingEnv) -> Tuple[float, float]:
        return state.score / self.max_score, 0.0

    def rewards(self, tracker: Tracker, state: GameState) -> Tuple[float, float, float]:
        r_b = state.score / self.max_score
        return r_b, 0.0, r_b


# ==================== EXPLORER ====================


class Explorer:
    """Runs iterations against a (possibly shared) archive."""

    def __init__(self, env: RacingEnv, objective, sampler: ActionTable, config: ExplorationConfig,
                 archive: Optional[Archive] = None):
        self.env = env
        self.objective = objective
        self.sampler = sampler
        self.config = config
        if archive is None:
            archive = Archive(lam=objective.lam, key_space=key_space_size(env.layout))
        self.archive = archive
        self.restores = 0
        self.replay_checks = 0

    def seed_archive(self, seed: int) -> ArchiveEntry:
        """Store the reset state as the first cell."""
        state = self.env.reset(seed)
        entry = ArchiveEntry(
            key=self.env.discretize(state),
            trajectory=EMPTY_TRAJECTORY,
            snapshot=self.env.snapshot(state),
            r_b=0.0,
            r_e=0.0,
            r_lambda=0.0,
            raw_score=0,
            iteration=0,
        )
        self.archive.offer(entry)
        return entry

    def return_to(self, entry: ArchiveEntry, iteration: int) -> GameState:
        """Restore the cell's snapshot, checking it against a full replay every so often."""
        state = self.env.restore(entry.snapshot)
        self.restores += 1
        if iteration % self.config.replay_check_every == 0:
            self.replay_checks += 1
            replayed = self.env.replay(state.seed, entry.trajectory.actions)
            if replayed != state:
                raise ReplayDivergenceError(
                    f"snapshot of {entry.key} differs from replaying its {entry.length} actions"
                )
        return state

    def explore_step(self, rng: np.random.Generator, iteration: int) -> int:
        """One iteration; returns the number of entries stored."""
        archive = self.archive
        entry = select_cell(archive, rng)
        state = self.return_to(entry, iteration)
        if state.finished:
            return 0

        tracker = self.objective.begin(entry)
        actions = list(entry.trajectory.actions)
        h_b = list(entry.trajectory.h_b)
        h_e = list(entry.trajectory.h_e)
        stored = 0

        for _ in range(self.config.actions_per_iteration):
            action = self.sampler.draw(rng)
            state = self.env.step(state, action)
            b, e = self.objective.observe(tracker, state, self.env)
            actions.append(action)
            h_b.append(b)
            h_e.append(e)

            r_b, r_e, r_lambda = self.objective.rewards(tracker, state)
            key = self.env.discretize(state)
            if state.finished or archive.would_accept(key, r_lambda, len(actions)):
                sum_b, sum_e = tracker.sums
                candidate = ArchiveEntry(
                    key=key,
                    trajectory=Trajectory(tuple(actions), tuple(h_b), tuple(h_e)),
                    snapshot=self.env.snapshot(state),
                    r_b=r_b,
                    r_e=r_e,
                    r_lambda=r_lambda,
                    raw_score=state.score,
                    iteration=iteration,
                    finished=state.finished,
                    sum_b=sum_b,
                    sum_e=sum_e,
                )
                if archive.offer(candidate):
                    stored += 1
            if state.finished:
                break
        return stored

    def progress_row(self, iteration: int) -> dict:
        archive = self.archive
        layout = self.env.layout
        best = archive.best_entry()
        return {
            "iteration": iteration,
            "cells": len(archive),
            "key_space_pct": 100.0 * len(archive) / key_space_size(layout),
            "lap2_pct": 100.0 * archive.lap_cells(2) / lap_key_space_size(layout),
            "insertions": archive.insertions,
            "replacements": archive.replacements,
            "best_r_lambda": best.r_lambda,
            "best_raw_score": best.raw_score,
        }

    def reached_max_score(self) -> bool:
        best = self.archive.best_finished
        return best is not None and best.raw_score >= self.env.max_score

    def run(self) -> List[dict]:
        """All configured iterations; returns the progress rows."""
        cfg = self.config
        progress: List[dict] = []
        progress_lock = threading.Lock()
        stop = threading.Event()
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.workers)]

        def record(iteration: int):
            row = self.progress_row(iteration)
            with progress_lock:
                progress.append(row)
            logger.info(
                "Iteration %d: %d cells (%.1f%% of key space, %.1f%% of lap 2), best R=%.4f score %d",
                iteration, row["cells"], row["key_space_pct"], row["lap2_pct"],
                row["best_r_lambda"], row["best_raw_score"],
                extra={"progress": row},
            )

        def worker(rng: np.random.Generator):
            while not stop.is_set():
                iteration = self.archive.count_iteration()
                if iteration > cfg.iterations:
                    break
                self.explore_step(rng, iteration)
                if iteration % cfg.progress_every == 0:
                    record(iteration)
                if cfg.stop_on_max_score and self.reached_max_score():
                    logger.info("Maximum score reached at iteration %d, stopping", iteration)
                    stop.set()

        if cfg.workers == 1:
            worker(rngs[0])
        else:
            with ThreadPoolExecutor(max_workers=cfg.workers, thread_name_prefix="explore") as pool:
                for future in [pool.submit(worker, rng) for rng in rngs]:
                    future.result()

        done = min(self.archive.iterations, cfg.iterations)
        if not progress or progress[-1]["iteration"] != done:
            record(done)
        return progress


def make_objective(config: ExplorationConfig, persona=None, dataset: Optional[PlaytraceDataset] = None,
                   affect_index: Optional[AffectIndex] = None, max_score: int = 16,
                   affect: Optional[AffectConfig] = None):
    if config.objective == "score":
        return ScoreObjective(max_score)
    if persona is None:
        raise ValueError("imitation runs need a persona")
    if affect_index is None:
        if dataset is None:
            raise ValueError("imitation runs need the playtrace dataset for the arousal index")
        affect_index = build_index(dataset, persona, affect)
    return BlendObjective(persona, affect_index, config.lam, max_score)


def run_exploration(config: ExplorationConfig, persona=None, dataset: Optional[PlaytraceDataset] = None,
                    env: Optional[RacingEnv] = None, affect_index: Optional[AffectIndex] = None,
                    sampler: Optional[ActionTable] = None,
                    progress_path: Optional[Union[str, Path]] = None,
                    affect: Optional[AffectConfig] = None) -> Tuple[Archive, ArchiveEntry]:
    """Run the configured number of iterations; returns the archive and its best entry."""
    env = env or RacingEnv()
    objective = make_objective(config, persona, dataset, affect_index, env.max_score, affect)
    if sampler is None:
        sampler = action_frequencies(dataset) if dataset is not None else ActionTable.uniform()

    archive = Archive(
        lam=objective.lam,
        key_space=key_space_size(env.layout),
        persona=getattr(persona, "label", None),
    )
    explorer = Explorer(env, objective, sampler, config, archive)
    explorer.seed_archive(config.seed)
    logger.info(
        "Exploring: persona=%s objective=%s lambda=%.2f iterations=%d workers=%d seed=%d",
        archive.persona, config.objective, objective.lam, config.iterations, config.workers, config.seed,
    )
    progress = explorer.run()
    archive.progress = progress

    if progress_path is not None:
        path = Path(progress_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(progress).to_csv(path, index=False)

    best = archive.best_entry()
    logger.info(
        "Exploration done: %d cells, %d replacements, best R=%.4f (R_b=%.4f, R_e=%.4f) score %d in %d windows",
        len(archive), archive.replacements, best.r_lambda, best.r_b, best.r_e, best.raw_score, best.length,
    )
    return archive, best


def replay_entry(env: RacingEnv, objective, seed: int, actions) -> Tuple[GameState, float, float]:
    """Fresh replay of an action log with rewards recomputed from scratch."""
    state = env.reset(seed)
    tracker = objective.begin()
    for action in actions:
        state = env.step(state, action)
        objective.observe(tracker, state, env)
    if not actions:
        return state, 0.0, 0.0
    r_b, r_e, _ = objective.rewards(tracker, state)
    return state, r_b, r_e


def validate_entry(env: RacingEnv, objective, seed: int, entry) -> None:
    """Replay an archived entry; raise if key, score or rewards differ from what was stored."""
    state, r_b, r_e = replay_entry(env, objective, seed, entry.actions)
    key = env.discretize(state)
    if key != entry.key or state.score != entry.raw_score or r_b != entry.r_b or r_e != entry.r_e:
        raise ReplayDivergenceError(
            f"replay of {entry.key} gave key {key}, score {state.score}, R_b {r_b!r}, R_e {r_e!r}; "
            f"stored score {entry.raw_score}, R_b {entry.r_b!r}, R_e {entry.r_e!r}"
        )
