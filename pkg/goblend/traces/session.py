"""Play sessions and playtrace datasets."""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence

import numpy as np

from goblend.env.features import FEATURE_COUNT, FEATURE_INDEX

logger = logging.getLogger(__name__)

MAX_WINDOWS = 480
CHECKPOINTS_PER_LAP = 8
GENERATOR_VERSION = "goblend-gen/1"


@dataclass(eq=False)
class PlaySession:
    """One play session: a feature row, an action and an arousal value per 250 ms window."""
    session_id: str
    features: np.ndarray  # (n, 24)
    actions: np.ndarray  # (n, 2) steer, gas
    arousal: np.ndarray  # (n,)
    tier_hint: Optional[str] = None
    seed: Optional[int] = None
    generator: str = GENERATOR_VERSION

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float).reshape(-1, FEATURE_COUNT)
        self.actions = np.asarray(self.actions, dtype=int).reshape(-1, 2)
        self.arousal = np.asarray(self.arousal, dtype=float).reshape(-1)
        n = len(self.features)
        if len(self.actions) != n or len(self.arousal) != n:
            raise ValueError(
                f"session {self.session_id}: {n} feature rows, {len(self.actions)} actions, "
                f"{len(self.arousal)} arousal values"
            )
        if n > MAX_WINDOWS:
            raise ValueError(f"session {self.session_id}: {n} windows exceeds {MAX_WINDOWS}")

    def __len__(self) -> int:
        return len(self.features)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlaySession):
            return NotImplemented
        return (
            self.session_id == other.session_id
            and self.tier_hint == other.tier_hint
            and self.seed == other.seed
            and self.generator == other.generator
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.arousal, other.arousal)
        )

    def column(self, name: str) -> np.ndarray:
        """One feature column by name."""
        return self.features[:, FEATURE_INDEX[name]]

    @property
    def scores(self) -> np.ndarray:
        return self.column("score")

    @property
    def final_score(self) -> float:
        return float(self.scores[-1]) if len(self) else 0.0


@dataclass(eq=False)
class PlaytraceDataset:
    """Ordered collection of sessions; treated as read-only once built."""
    sessions: List[PlaySession] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for s in self.sessions:
            if s.session_id in seen:
                raise ValueError(f"duplicate session id {s.session_id!r}")
            seen.add(s.session_id)
        self._by_id: Dict[str, PlaySession] = {s.session_id: s for s in self.sessions}

    def __len__(self) -> int:
        return len(self.sessions)

    def __iter__(self) -> Iterator[PlaySession]:
        return iter(self.sessions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlaytraceDataset):
            return NotImplemented
        return self.sessions == other.sessions

    def __getitem__(self, session_id: str) -> PlaySession:
        return self._by_id[session_id]

    @property
    def session_ids(self) -> List[str]:
        return [s.session_id for s in self.sessions]

    def subset(self, session_ids: Iterable[str]) -> "PlaytraceDataset":
        """Sessions with the given ids, in dataset order."""
        wanted = set(session_ids)
        missing = wanted - set(self._by_id)
        if missing:
            raise KeyError(f"unknown session ids: {sorted(missing)}")
        return PlaytraceDataset([s for s in self.sessions if s.session_id in wanted])

    def window_count(self) -> int:
        return sum(len(s) for s in self.sessions)


def normalize_trace(trace: Sequence[float]) -> np.ndarray:
    """Min-max scale one session's trace to [0, 1]; a constant trace becomes all 0.5."""
    values = np.asarray(trace, dtype=float)
    if values.size == 0:
        raise ValueError("cannot normalize an empty trace")
    if not np.all(np.isfinite(values)):
        raise ValueError("trace contains non-finite values")
    low, high = values.min(), values.max()
    if high == low:
        return np.full(values.shape, 0.5)
    scaled = (values - low) / (high - low)
    # Pin the extremes exactly so normalizing twice is a no-op
    scaled[values == low] = 0.0
    scaled[values == high] = 1.0
    return scaled


def truncate_to_laps(session: PlaySession, laps: int = 2) -> PlaySession:
    """Drop the windows recorded after the given lap was completed."""
    if laps not in (1, 2):
        raise ValueError(f"laps must be 1 or 2, got {laps}")
    target = CHECKPOINTS_PER_LAP * laps
    reached = np.flatnonzero(session.scores >= target)
    if reached.size == 0:
        return session
    end = int(reached[0]) + 1
    if end == len(session):
        return session
    return replace(
        session,
        features=session.features[:end],
        actions=session.actions[:end],
        arousal=session.arousal[:end],
    )
