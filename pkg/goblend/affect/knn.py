"""Distance-weighted kNN arousal estimates over a persona's playtraces."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.neighbors import KDTree
from sklearn.preprocessing import StandardScaler

from goblend.errors import AffectIndexError
from goblend.traces.session import PlaytraceDataset, normalize_trace

logger = logging.getLogger(__name__)

# Relative slack between tree distances and the exact recomputation
TREE_DISTANCE_SLACK = 1e-9


class Weighting(str, Enum):
    DUDANI = "dudani"
    INVERSE_DISTANCE = "inverse-distance"
    LITERAL_PROSE = "literal-prose"


class AffectConfig(BaseModel):
    """kNN arousal settings."""
    model_config = ConfigDict(extra="forbid")

    k: int = Field(5, ge=1)
    weighting: Weighting = Weighting.DUDANI
    # Extra tree candidates fetched so distance ties at the k-th neighbor resolve by row index
    candidate_margin: int = Field(8, ge=0)
    leaf_size: int = Field(40, ge=1)


@dataclass(eq=False)
class AffectIndex:
    """Standardized feature rows of one persona with their normalized arousal values."""
    rows: np.ndarray
    arousal: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    k: int
    weighting: Weighting
    candidate_margin: int
    tree: Optional[KDTree] = None

    def __len__(self) -> int:
        return len(self.rows)

    def standardize(self, query: np.ndarray) -> np.ndarray:
        return (np.asarray(query, dtype=float) - self.mean) / self.scale


def build_index(dataset: PlaytraceDataset, persona, config: Optional[AffectConfig] = None) -> AffectIndex:
    """Index the windows of the persona's member sessions."""
    config = config or AffectConfig()
    members = set(persona.member_ids)
    sessions = [s for s in dataset if s.session_id in members]
    if not sessions:
        raise AffectIndexError(f"persona {persona.label!r} has no sessions in the dataset")

    features = np.vstack([s.features for s in sessions])
    arousal = np.concatenate([normalize_trace(s.arousal) for s in sessions])
    if not np.all(np.isfinite(features)):
        raise AffectIndexError("feature rows contain non-finite values")
    if len(features) < config.k:
        raise AffectIndexError(f"persona {persona.label!r} has {len(features)} windows, fewer than k={config.k}")

    scaler = StandardScaler().fit(features)
    mean, scale = scaler.mean_, scaler.scale_
    rows = (features - mean) / scale
    index = AffectIndex(
        rows=rows,
        arousal=arousal,
        mean=mean,
        scale=scale,
        k=config.k,
        weighting=Weighting(config.weighting),
        candidate_margin=config.candidate_margin,
        tree=KDTree(rows, leaf_size=config.leaf_size),
    )
    logger.info("Built arousal index for persona %s: %d rows from %d sessions, k=%d",
                persona.label, len(rows), len(sessions), config.k)
    return index


def _distances(rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = rows - q
    return np.sqrt(np.sum(diff * diff, axis=1))


def brute_force_neighbors(index: AffectIndex, query: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Exhaustive k nearest rows; ties by ascending row index."""
    q = index.standardize(query)
    dist = _distances(index.rows, q)
    order = np.lexsort((np.arange(len(dist)), dist))[: index.k]
    return order, dist[order]


def neighbors(index: AffectIndex, query: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Tree-accelerated k nearest rows, identical to the exhaustive scan."""
    n = len(index)
    want = min(n, index.k + index.candidate_margin)
    if index.tree is None or want >= n:
        return brute_force_neighbors(index, query)

    q = index.standardize(query)
    tree_dist, cand = index.tree.query(q.reshape(1, -1), k=want)
    cand = cand[0]
    dist = _distances(index.rows[cand], q)
    order = np.lexsort((cand, dist))[: index.k]
    d_k = dist[order[-1]]
    # Rows outside the candidate set must be strictly farther than the k-th neighbor
    if tree_dist[0, -1] <= d_k * (1.0 + TREE_DISTANCE_SLACK) + 1e-12:
        return brute_force_neighbors(index, query)
    return cand[order], dist[order]


def weighted_estimate(distances: np.ndarray, values: np.ndarray, weighting: Weighting) -> float:
    """Weighted mean of neighbor values, distances sorted ascending."""
    exact = distances == 0.0
    if exact.any():
        return float(np.clip(values[exact].mean(), 0.0, 1.0))
    if weighting is Weighting.DUDANI:
        d1, dk = distances[0], distances[-1]
        if dk == d1:
            weights = np.ones_like(distances)
        else:
            weights = (dk - distances) / (dk - d1)
    elif weighting is Weighting.INVERSE_DISTANCE:
        weights = 1.0 / distances
    else:
        weights = distances
    return float(np.clip(np.dot(weights, values) / weights.sum(), 0.0, 1.0))


def estimate_arousal(index: AffectIndex, query: np.ndarray) -> float:
    """Arousal in [0, 1] for one feature vector."""
    rows, dist = neighbors(index, query)
    return weighted_estimate(dist, index.arousal[rows], index.weighting)


def brute_force_oracle(index: AffectIndex, query: np.ndarray) -> float:
    rows, dist = brute_force_neighbors(index, query)
    return weighted_estimate(dist, index.arousal[rows], index.weighting)
