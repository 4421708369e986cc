"""Session-level summary vectors for clustering."""
from typing import Sequence

import numpy as np
from sklearn.preprocessing import StandardScaler

from goblend.errors import ClusteringError
from goblend.traces.session import PlaySession

AGGREGATE_FIELDS = [
    "max_score",
    "mean_speed",
    "mean_abs_lateral_offset",
    "mean_abs_heading_error",
    "mean_abs_speed_delta",
    "mean_nearest_visible_opponent",
    "offroad_windows",
    "crash_windows",
    "length",
]


def aggregate(session: PlaySession) -> np.ndarray:
    """Summary of one (already truncated) session, before standardization."""
    if len(session) == 0:
        raise ClusteringError(f"session {session.session_id} has no windows")
    return np.array([
        session.scores.max(),
        session.column("speed").mean(),
        np.abs(session.column("lateral_offset")).mean(),
        np.abs(session.column("heading_error")).mean(),
        np.abs(session.column("speed_delta")).mean(),
        session.column("nearest_visible_opponent").mean(),
        np.count_nonzero(session.column("on_grass") > 0.5),
        np.count_nonzero(session.column("crashed") > 0.5),
        len(session),
    ], dtype=float)


def aggregate_matrix(sessions: Sequence[PlaySession]) -> np.ndarray:
    """Raw summary vectors, one row per session."""
    return np.vstack([aggregate(s) for s in sessions])


def standardize(vectors: np.ndarray) -> np.ndarray:
    """Column z-scores across the dataset; constant columns become 0."""
    vectors = np.asarray(vectors, dtype=float)
    if not np.all(np.isfinite(vectors)):
        raise ClusteringError("aggregate vectors contain non-finite values")
    return StandardScaler().fit_transform(vectors)
