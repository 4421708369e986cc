"""Error types for Goblend."""
from typing import Optional


class GoblendError(Exception):
    """Base class for all Goblend errors."""


class TrackParseError(GoblendError, ValueError):
    """Track file could not be parsed."""


class TrackValidationError(GoblendError, ValueError):
    """Track geometry parsed but is not a valid closed circuit."""


class ContractViolationError(GoblendError, RuntimeError):
    """An environment precondition was violated (e.g. stepping a finished race)."""


class SnapshotDecodeError(GoblendError, ValueError):
    """A state snapshot blob is corrupted or from an unknown format."""


class PlaytraceFormatError(GoblendError, ValueError):
    """Playtrace CSV is malformed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ClusteringError(GoblendError, ValueError):
    """Clustering input or construction is invalid."""


class AffectIndexError(GoblendError, ValueError):
    """The arousal index cannot be built from the given data."""


class RewardInputError(GoblendError, ValueError):
    """Trace passed to a reward function is empty or out of range."""


class ArchiveInvariantError(GoblendError, RuntimeError):
    """An archive law was broken during exploration."""


class ReplayDivergenceError(GoblendError, RuntimeError):
    """Replaying an action log did not reproduce the recorded state."""


class PersonaNotFoundError(GoblendError, LookupError):
    """A persona artifact required by an experiment is missing."""
