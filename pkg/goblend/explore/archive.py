"""The exploration archive: best-known trajectory per cell."""
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from goblend.env.cells import CellKey, SpeedBucket
from goblend.errors import ArchiveInvariantError

logger = logging.getLogger(__name__)

# Two rewards closer than this are equal for replacement purposes
REWARD_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Actions from reset plus the cached per-window behavior and experience traces."""
    actions: Tuple[Tuple[int, int], ...]
    h_b: Tuple[float, ...]
    h_e: Tuple[float, ...]

    def __post_init__(self):
        if not len(self.actions) == len(self.h_b) == len(self.h_e):
            raise ArchiveInvariantError(
                f"trajectory lengths differ: {len(self.actions)} actions, {len(self.h_b)} h_b, {len(self.h_e)} h_e"
            )

    def __len__(self) -> int:
        return len(self.actions)


EMPTY_TRAJECTORY = Trajectory((), (), ())


@dataclass(frozen=True, eq=False)
class ArchiveEntry:
    key: CellKey
    trajectory: Trajectory
    snapshot: bytes
    r_b: float
    r_e: float
    r_lambda: float
    raw_score: int
    iteration: int
    finished: bool = False
    # Running accumulator sums, so exploration can continue the rewards from this cell
    sum_b: float = 0.0
    sum_e: float = 0.0

    @property
    def length(self) -> int:
        return len(self.trajectory)

    @property
    def actions(self) -> Tuple[Tuple[int, int], ...]:
        return self.trajectory.actions

    def rank(self) -> Tuple[float, int, int]:
        """Best-entry ordering: reward, then raw score, then shorter."""
        return (self.r_lambda, self.raw_score, -self.length)


def is_improvement(candidate_reward: float, candidate_length: int, current: Optional[ArchiveEntry]) -> bool:
    """Replacement criteria: unseen cell, strictly higher reward, or equal reward and shorter."""
    if current is None:
        return True
    delta = candidate_reward - current.r_lambda
    if delta > REWARD_TOLERANCE:
        return True
    return abs(delta) <= REWARD_TOLERANCE and candidate_length < current.length


class Archive:
    """Map from cell keys to entries, safe to share between worker threads."""

    def __init__(self, lam: float, key_space: Optional[int] = None, persona: Optional[str] = None):
        self.lam = lam
        self.key_space = key_space
        self.persona = persona
        self._entries: Dict[CellKey, ArchiveEntry] = {}
        self._keys: List[CellKey] = []
        self._lock = threading.Lock()
        self.best_finished: Optional[ArchiveEntry] = None
        self.insertions = 0
        self.replacements = 0
        self.rejections = 0
        self.iterations = 0
        self.progress: List[dict] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: CellKey) -> bool:
        return key in self._entries

    def get(self, key: CellKey) -> Optional[ArchiveEntry]:
        return self._entries.get(key)

    def entries(self) -> List[ArchiveEntry]:
        """Entries in discovery order."""
        with self._lock:
            return [self._entries[k] for k in self._keys]

    def would_accept(self, key: CellKey, r_lambda: float, length: int) -> bool:
        """Unlocked pre-check; offer() decides again under the lock."""
        return is_improvement(r_lambda, length, self._entries.get(key))

    def _check_entry(self, entry: ArchiveEntry):
        for name in ("r_b", "r_e", "r_lambda"):
            value = getattr(entry, name)
            if not 0.0 <= value <= 1.0:
                raise ArchiveInvariantError(f"{name}={value} outside [0, 1] for {entry.key}")
        expected = self.lam * entry.r_e + (1.0 - self.lam) * entry.r_b
        if abs(entry.r_lambda - expected) > REWARD_TOLERANCE:
            raise ArchiveInvariantError(f"R_lambda {entry.r_lambda} is not the blend {expected} for {entry.key}")

    def offer(self, entry: ArchiveEntry) -> bool:
        """Atomic compare-and-replace for the entry's cell; True when the entry was stored."""
        self._check_entry(entry)
        with self._lock:
            if entry.finished and (self.best_finished is None or entry.rank() > self.best_finished.rank()):
                self.best_finished = entry

            current = self._entries.get(entry.key)
            if not is_improvement(entry.r_lambda, entry.length, current):
                self.rejections += 1
                return False

            if current is None:
                if self.key_space is not None and len(self._entries) >= self.key_space:
                    raise ArchiveInvariantError(f"archive exceeds key space of {self.key_space} cells")
                self._keys.append(entry.key)
                self.insertions += 1
            else:
                if entry.r_lambda < current.r_lambda - REWARD_TOLERANCE:
                    raise ArchiveInvariantError(
                        f"stored reward would drop from {current.r_lambda} to {entry.r_lambda} at {entry.key}"
                    )
                if entry.r_lambda <= current.r_lambda + REWARD_TOLERANCE and entry.length >= current.length:
                    raise ArchiveInvariantError(f"equal-reward replacement did not shorten the trajectory at {entry.key}")
                self.replacements += 1
            self._entries[entry.key] = entry
            return True

    def count_iteration(self) -> int:
        with self._lock:
            self.iterations += 1
            return self.iterations

    def best_entry(self) -> ArchiveEntry:
        """Best finished trajectory seen, or the best stored entry when nothing finished."""
        with self._lock:
            if self.best_finished is not None:
                return self.best_finished
            if not self._entries:
                raise ArchiveInvariantError("archive is empty")
            return max((self._entries[k] for k in self._keys), key=ArchiveEntry.rank)

    def lap_cells(self, lap: int) -> int:
        return sum(1 for k in self._keys if k.lap == lap)

    # ==================== DUMP ====================

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, entry in enumerate(self.entries()):
            row = {"entry": i, **entry.key.as_row()}
            row.update({
                "r_b": entry.r_b,
                "r_e": entry.r_e,
                "r_lambda": entry.r_lambda,
                "raw_score": entry.raw_score,
                "length": entry.length,
                "iteration": entry.iteration,
                "finished": int(entry.finished),
            })
            rows.append(row)
        return pd.DataFrame(rows)

    def dump(self, directory: Union[str, Path]) -> Path:
        """archive.csv with one row per entry, and one action-log CSV per entry."""
        directory = Path(directory)
        actions_dir = directory / "actions"
        actions_dir.mkdir(parents=True, exist_ok=True)
        frame = self.to_frame()
        frame.to_csv(directory / "archive.csv", index=False)
        for i, entry in enumerate(self.entries()):
            log = np.asarray(entry.trajectory.actions, dtype=int).reshape(-1, 2)
            pd.DataFrame({"window": np.arange(1, len(log) + 1), "steer": log[:, 0], "gas": log[:, 1]}).to_csv(
                actions_dir / f"{i:05d}.csv", index=False,
            )
        logger.info("Dumped %d archive entries to %s", len(frame), directory)
        return directory


@dataclass(frozen=True)
class DumpedEntry:
    key: CellKey
    r_b: float
    r_e: float
    r_lambda: float
    raw_score: int
    actions: Tuple[Tuple[int, int], ...]


def load_archive_dump(directory: Union[str, Path]) -> List[DumpedEntry]:
    """Read back an archive dump for replay validation."""
    directory = Path(directory)
    frame = pd.read_csv(directory / "archive.csv", float_precision="round_trip")
    entries = []
    for row in frame.itertuples(index=False):
        log = pd.read_csv(directory / "actions" / f"{int(row.entry):05d}.csv")
        entries.append(DumpedEntry(
            key=CellKey(
                lap=int(row.lap),
                sub_segment=int(row.sub_segment),
                speed_bucket=SpeedBucket(row.speed_bucket),
                rotation_bucket=int(row.rotation_bucket),
                proximity=bool(row.proximity),
            ),
            r_b=float(row.r_b),
            r_e=float(row.r_e),
            r_lambda=float(row.r_lambda),
            raw_score=int(row.raw_score),
            actions=tuple(zip(log["steer"].astype(int).tolist(), log["gas"].astype(int).tolist())),
        ))
    return entries


def select_cell(archive: Archive, rng: np.random.Generator) -> ArchiveEntry:
    """Uniform random choice over the stored cells."""
    with archive._lock:
        if not archive._keys:
            raise ArchiveInvariantError("cannot select from an empty archive")
        key = archive._keys[int(rng.integers(len(archive._keys)))]
        return archive._entries[key]
