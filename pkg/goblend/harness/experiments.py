"""Experiment protocol: persona x lambda matrix plus random and winner baselines."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats as scipy_stats

from goblend.affect.knn import AffectConfig, AffectIndex, build_index
from goblend.env.racing import RacingEnv
from goblend.errors import PersonaNotFoundError
from goblend.explore.explorer import ExplorationConfig, run_exploration
from goblend.explore.sampling import ActionTable, action_frequencies
from goblend.harness.stats import STAT_FIELDS, InGameStatistics, compare_rewards, compute_stats
from goblend.personas.persona import DEFAULT_LABELS, PersonaModel
from goblend.traces.session import PlaytraceDataset

logger = logging.getLogger(__name__)

RANDOM = "random"
WINNER = "winner"


class HarnessConfig(BaseModel):
    """Experiment matrix settings."""
    model_config = ConfigDict(extra="forbid")

    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    lambdas: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0])
    personas: List[str] = Field(default_factory=lambda: list(DEFAULT_LABELS))
    baselines: bool = True
    exploration: ExplorationConfig = Field(default_factory=ExplorationConfig)
    # Experiments run in separate processes when > 1
    workers: int = Field(1, ge=1)


@dataclass
class SeedRun:
    """Best trajectory of one seeded run with its replayed statistics and rewards."""
    seed: int
    actions: List[Tuple[int, int]]
    stats: InGameStatistics
    # persona label -> (R_b, R_e)
    rewards: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "actions": [list(a) for a in self.actions],
            "stats": self.stats.to_dict(),
            "rewards": {k: {"r_b": v[0], "r_e": v[1]} for k, v in self.rewards.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SeedRun":
        return cls(
            seed=int(data["seed"]),
            actions=[(int(s), int(g)) for s, g in data["actions"]],
            stats=InGameStatistics(**data["stats"]),
            rewards={k: (float(v["r_b"]), float(v["r_e"])) for k, v in data["rewards"].items()},
        )


@dataclass
class ExperimentResult:
    """One row of the matrix: a persona and lambda, or a baseline, over several seeds."""
    experiment_id: str
    kind: str
    persona: Optional[str]
    lam: Optional[float]
    runs: List[SeedRun] = field(default_factory=list)

    @property
    def seeds(self) -> List[int]:
        return [r.seed for r in self.runs]

    def summary(self) -> Dict[str, Tuple[Optional[float], Optional[float]]]:
        """Mean and 95% CI half-width of every statistic, plus own-persona rewards."""
        rows = {name: aggregate([getattr(r.stats, name) for r in self.runs]) for name in STAT_FIELDS}
        if self.persona is not None:
            rows["r_b"] = aggregate([r.rewards[self.persona][0] for r in self.runs])
            rows["r_e"] = aggregate([r.rewards[self.persona][1] for r in self.runs])
        return rows

    def mean_reward(self, persona: str) -> Tuple[float, float]:
        values = np.array([r.rewards[persona] for r in self.runs], dtype=float)
        return float(values[:, 0].mean()), float(values[:, 1].mean())


def aggregate(values: Sequence[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    """Mean and Student-t 95% half-width; missing values are skipped, fewer than two give no CI."""
    present = np.array([v for v in values if v is not None], dtype=float)
    if present.size == 0:
        return None, None
    mean = float(present.mean())
    if present.size < 2:
        return mean, None
    n = present.size
    half = float(scipy_stats.t.ppf(0.975, n - 1) * present.std(ddof=1) / math.sqrt(n))
    return mean, half


def experiment_id(persona: str, lam: float) -> str:
    return f"{persona}_l{lam:g}"


# ==================== RUNS ====================


def _evaluate(actions, seed: int, env: RacingEnv, personas: Dict[str, PersonaModel],
              indices: Dict[str, AffectIndex], expected_h_b=None) -> SeedRun:
    stats = compute_stats(actions, env, seed, expected_h_b)
    rewards = {label: compare_rewards(actions, p, env, seed, indices[label]) for label, p in personas.items()}
    return SeedRun(seed=seed, actions=[tuple(a) for a in actions], stats=stats, rewards=rewards)


def build_indices(dataset: PlaytraceDataset, personas: Dict[str, PersonaModel],
                  affect: Optional[AffectConfig] = None) -> Dict[str, AffectIndex]:
    return {label: build_index(dataset, p, affect) for label, p in personas.items()}


def persona_run(config: HarnessConfig, persona: PersonaModel, lam: float, dataset: PlaytraceDataset,
                personas: Dict[str, PersonaModel], env: Optional[RacingEnv] = None,
                indices: Optional[Dict[str, AffectIndex]] = None,
                affect: Optional[AffectConfig] = None) -> ExperimentResult:
    """Imitation runs for one persona and lambda, one per seed."""
    env = env or RacingEnv()
    if indices is None:
        indices = build_indices(dataset, personas, affect)
    sampler = action_frequencies(dataset)
    result = ExperimentResult(experiment_id(persona.label, lam), "persona", persona.label, lam)
    for seed in config.seeds:
        exploration = config.exploration.model_copy(update={"lam": lam, "seed": seed, "objective": "blend"})
        _, best = run_exploration(exploration, persona, dataset, env, indices[persona.label], sampler)
        result.runs.append(_evaluate(best.actions, seed, env, personas, indices, best.trajectory.h_b))
    return result


def winner_run(config: HarnessConfig, dataset: PlaytraceDataset, personas: Dict[str, PersonaModel],
               env: Optional[RacingEnv] = None, indices: Optional[Dict[str, AffectIndex]] = None,
               affect: Optional[AffectConfig] = None) -> ExperimentResult:
    """Same engine with the reward replaced by raw score over the maximum."""
    env = env or RacingEnv()
    if indices is None:
        indices = build_indices(dataset, personas, affect)
    sampler = action_frequencies(dataset)
    result = ExperimentResult(WINNER, WINNER, None, None)
    for seed in config.seeds:
        exploration = config.exploration.model_copy(update={"lam": 0.0, "seed": seed, "objective": "score"})
        _, best = run_exploration(exploration, None, dataset, env, sampler=sampler)
        result.runs.append(_evaluate(best.actions, seed, env, personas, indices, best.trajectory.h_b))
    return result


def random_rollout(env: RacingEnv, table: ActionTable, seed: int) -> List[Tuple[int, int]]:
    """Actions drawn from the frequency table until the race ends."""
    rng = np.random.default_rng(seed)
    state = env.reset(seed)
    actions = []
    while not state.finished:
        action = table.draw(rng)
        state = env.step(state, action)
        actions.append(action)
    return actions


def random_run(config: HarnessConfig, dataset: PlaytraceDataset, personas: Dict[str, PersonaModel],
               env: Optional[RacingEnv] = None, indices: Optional[Dict[str, AffectIndex]] = None,
               affect: Optional[AffectConfig] = None) -> ExperimentResult:
    """No archive: one weighted-random rollout per seed."""
    env = env or RacingEnv()
    if indices is None:
        indices = build_indices(dataset, personas, affect)
    table = action_frequencies(dataset)
    result = ExperimentResult(RANDOM, RANDOM, None, None)
    for seed in config.seeds:
        result.runs.append(_evaluate(random_rollout(env, table, seed), seed, env, personas, indices))
    return result


# ==================== MATRIX ====================


@dataclass(frozen=True)
class MatrixJob:
    kind: str
    persona: Optional[str] = None
    lam: Optional[float] = None


def matrix_jobs(config: HarnessConfig) -> List[MatrixJob]:
    jobs = [MatrixJob(RANDOM), MatrixJob(WINNER)] if config.baselines else []
    jobs.extend(MatrixJob("persona", label, lam) for label in config.personas for lam in config.lambdas)
    return jobs


def run_job(job: MatrixJob, config: HarnessConfig, dataset: PlaytraceDataset,
            personas: Dict[str, PersonaModel], env: RacingEnv,
            indices: Optional[Dict[str, AffectIndex]] = None,
            affect: Optional[AffectConfig] = None) -> ExperimentResult:
    if indices is None:
        indices = build_indices(dataset, personas, affect)
    logger.info("Running experiment %s", job.kind if job.persona is None else experiment_id(job.persona, job.lam))
    if job.kind == RANDOM:
        return random_run(config, dataset, personas, env, indices)
    if job.kind == WINNER:
        return winner_run(config, dataset, personas, env, indices)
    return persona_run(config, personas[job.persona], job.lam, dataset, personas, env, indices)


def run_matrix(config: HarnessConfig, dataset: PlaytraceDataset, personas: Dict[str, PersonaModel],
               env: Optional[RacingEnv] = None, affect: Optional[AffectConfig] = None) -> List[ExperimentResult]:
    """Every configured (persona, lambda) pair plus the baselines, in a fixed order."""
    missing = [label for label in config.personas if label not in personas]
    if missing:
        raise PersonaNotFoundError(f"missing persona artifacts: {missing}")
    personas = {label: personas[label] for label in config.personas}
    env = env or RacingEnv()
    jobs = matrix_jobs(config)
    logger.info("Experiment matrix: %d rows x %d seeds, %d workers", len(jobs), len(config.seeds), config.workers)

    if config.workers == 1:
        indices = build_indices(dataset, personas, affect)
        return [run_job(job, config, dataset, personas, env, indices) for job in jobs]

    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(run_job, job, config, dataset, personas, env, None, affect) for job in jobs]
        return [f.result() for f in futures]
