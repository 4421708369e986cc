"""Persona discovery: aggregate, cluster, cut and summarize play sessions."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from goblend.errors import ClusteringError, PersonaNotFoundError
from goblend.explore.sampling import ACTIONS, ActionTable, action_frequencies
from goblend.personas.aggregate import aggregate_matrix, standardize
from goblend.personas.ward import Dendrogram, cut, threshold_for_clusters, ward_cluster
from goblend.traces.session import PlaySession, PlaytraceDataset, normalize_trace, truncate_to_laps

logger = logging.getLogger(__name__)

PERSONA_FORMAT = "goblend-persona/1"
TRACE_LENGTH = 480
MAX_SCORE = 16
DEFAULT_LABELS = ["expert", "advanced", "intermediate", "beginner"]


class ClusterConfig(BaseModel):
    """Persona discovery settings."""
    model_config = ConfigDict(extra="forbid")

    cut_threshold: Optional[float] = Field(None, gt=0)
    n_personas: int = Field(4, ge=1)
    laps: int = Field(2, ge=1, le=2)
    labels: List[str] = Field(default_factory=lambda: list(DEFAULT_LABELS))
    trace_length: int = Field(TRACE_LENGTH, ge=1)
    max_score: int = Field(MAX_SCORE, ge=1)


@dataclass(eq=False)
class PersonaModel:
    """Targets and action statistics of one player cluster."""
    label: str
    member_ids: List[str]
    score_trace: np.ndarray
    arousal_trace: np.ndarray
    action_table: ActionTable
    mean_final_score: float = 0.0
    mean_length: float = 0.0
    cut_threshold: Optional[float] = None

    @property
    def member_count(self) -> int:
        return len(self.member_ids)

    def to_dict(self) -> dict:
        return {
            "format": PERSONA_FORMAT,
            "label": self.label,
            "member_ids": list(self.member_ids),
            "member_count": self.member_count,
            "mean_final_score": self.mean_final_score,
            "mean_length": self.mean_length,
            "cut_threshold": self.cut_threshold,
            "score_trace": [float(v) for v in self.score_trace],
            "arousal_trace": [float(v) for v in self.arousal_trace],
            "action_frequencies": self.action_table.as_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PersonaModel":
        if data.get("format") != PERSONA_FORMAT:
            raise ValueError(f"unknown persona format {data.get('format')!r}")
        freqs = data["action_frequencies"]
        table = ActionTable(np.array([freqs[f"{s},{g}"] for s, g in ACTIONS], dtype=float))
        return cls(
            label=data["label"],
            member_ids=list(data["member_ids"]),
            score_trace=np.asarray(data["score_trace"], dtype=float),
            arousal_trace=np.asarray(data["arousal_trace"], dtype=float),
            action_table=table,
            mean_final_score=float(data.get("mean_final_score", 0.0)),
            mean_length=float(data.get("mean_length", 0.0)),
            cut_threshold=data.get("cut_threshold"),
        )


@dataclass(eq=False)
class PersonaSet:
    """Result of clustering a dataset into personas."""
    personas: List[PersonaModel]
    dendrogram: Dendrogram
    assignments: Dict[str, str] = field(default_factory=dict)
    cut_threshold: float = 0.0

    def by_label(self) -> Dict[str, PersonaModel]:
        return {p.label: p for p in self.personas}


def hold_at_final(trace: np.ndarray, length: int) -> np.ndarray:
    """Pad a trace to length by repeating its last value (or cut it to length)."""
    trace = np.asarray(trace, dtype=float)
    if len(trace) >= length:
        return trace[:length]
    return np.concatenate([trace, np.full(length - len(trace), trace[-1])])


def build_persona(sessions: Sequence[PlaySession], label: str = "", trace_length: int = TRACE_LENGTH,
                  max_score: int = MAX_SCORE, cut_threshold: Optional[float] = None) -> PersonaModel:
    """Mean held-at-final score and arousal traces plus action frequencies of a cluster."""
    if not sessions:
        raise ClusteringError(f"persona {label!r} has no member sessions")
    scores = np.vstack([hold_at_final(s.scores, trace_length) for s in sessions]) / max_score
    arousal = np.vstack([hold_at_final(normalize_trace(s.arousal), trace_length) for s in sessions])
    # Column means of non-decreasing rows are non-decreasing; clip removes rounding wiggle
    score_trace = np.maximum.accumulate(np.clip(scores.mean(axis=0), 0.0, 1.0))
    return PersonaModel(
        label=label,
        member_ids=[s.session_id for s in sessions],
        score_trace=score_trace,
        arousal_trace=np.clip(arousal.mean(axis=0), 0.0, 1.0),
        action_table=action_frequencies(sessions),
        mean_final_score=float(np.mean([s.final_score for s in sessions])),
        mean_length=float(np.mean([len(s) for s in sessions])),
        cut_threshold=cut_threshold,
    )


def discover_personas(dataset: PlaytraceDataset, config: Optional[ClusterConfig] = None) -> PersonaSet:
    """Truncate, aggregate, cluster and label every session of the dataset."""
    config = config or ClusterConfig()
    sessions = [truncate_to_laps(s, config.laps) for s in dataset]
    if len(sessions) < 2:
        raise ClusteringError(f"need at least two sessions, got {len(sessions)}")

    vectors = standardize(aggregate_matrix(sessions))
    dendrogram = ward_cluster(vectors)
    threshold = config.cut_threshold
    if threshold is None:
        threshold = threshold_for_clusters(dendrogram, min(config.n_personas, len(sessions)))
        logger.info("Derived cut threshold %.4f for %d personas", threshold, config.n_personas)
    labels = cut(dendrogram, threshold)

    clusters: Dict[int, List[PlaySession]] = {}
    for session, label in zip(sessions, labels):
        clusters.setdefault(int(label), []).append(session)
    if len(clusters) != config.n_personas:
        logger.warning("Cut at %.4f gave %d clusters, expected %d", threshold, len(clusters), config.n_personas)

    def rank_key(members: List[PlaySession]):
        return (-np.mean([s.final_score for s in members]), np.mean([len(s) for s in members]))

    ranked = sorted(clusters.values(), key=rank_key)
    personas = []
    assignments = {}
    for rank, members in enumerate(ranked):
        name = config.labels[rank] if rank < len(config.labels) else f"cluster-{rank}"
        persona = build_persona(members, name, config.trace_length, config.max_score, threshold)
        personas.append(persona)
        assignments.update({s.session_id: name for s in members})
        logger.info(
            "Persona %s: %d members, mean final score %.2f, mean length %.1f windows",
            name, persona.member_count, persona.mean_final_score, persona.mean_length,
        )
    return PersonaSet(personas=personas, dendrogram=dendrogram, assignments=assignments, cut_threshold=threshold)


def persona_path(directory: Union[str, Path], label: str) -> Path:
    return Path(directory) / f"persona_{label}.json"


def save_personas(personas: Sequence[PersonaModel], directory: Union[str, Path]) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for persona in personas:
        path = persona_path(directory, persona.label)
        path.write_text(json.dumps(persona.to_dict(), indent=2), encoding="utf-8")
        paths.append(path)
    logger.info("Saved %d personas to %s", len(paths), directory)
    return paths


def load_persona(directory: Union[str, Path], label: str) -> PersonaModel:
    path = persona_path(directory, label)
    if not path.exists():
        raise PersonaNotFoundError(f"no persona artifact for {label!r} at {path}")
    return PersonaModel.from_dict(json.loads(path.read_text(encoding="utf-8")))


def load_personas(directory: Union[str, Path]) -> Dict[str, PersonaModel]:
    """Every persona artifact in a directory, keyed by label."""
    personas = {}
    for path in sorted(Path(directory).glob("persona_*.json")):
        persona = PersonaModel.from_dict(json.loads(path.read_text(encoding="utf-8")))
        personas[persona.label] = persona
    return personas
