"""Categorical cell keys used to bucket simulator states in the exploration archive."""
import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterator

from goblend.env.track import TrackLayout

if TYPE_CHECKING:
    from goblend.env.racing import GameState

logger = logging.getLogger(__name__)

LAPS = 2
ROTATION_BUCKETS = 6
ROTATION_BUCKET_DEG = 30.0

# Counts states that had to be snapped back onto the track grid
diagnostics: Counter = Counter()


class SpeedBucket(Enum):
    SLOW = "slow"
    FAST = "fast"


@dataclass(frozen=True)
class CellKey:
    """Discretized game state; equality and hashing are field-wise."""
    lap: int
    sub_segment: int
    speed_bucket: SpeedBucket
    rotation_bucket: int
    proximity: bool

    def as_row(self) -> dict:
        return {
            "lap": self.lap,
            "sub_segment": self.sub_segment,
            "speed_bucket": self.speed_bucket.value,
            "rotation_bucket": self.rotation_bucket,
            "proximity": int(self.proximity),
        }

    def __lt__(self, other: "CellKey") -> bool:
        return self._sort_key() < other._sort_key()

    def _sort_key(self):
        return (self.lap, self.sub_segment, self.speed_bucket.value, self.rotation_bucket, self.proximity)


def rotation_bucket(heading_error: float) -> int:
    """Six 30 degree buckets over [-90, +90); values on a boundary go to the lower bucket."""
    degrees = math.degrees(heading_error)
    bucket = math.ceil((degrees + 90.0) / ROTATION_BUCKET_DEG) - 1
    return min(max(bucket, 0), ROTATION_BUCKETS - 1)


def discretize(state: "GameState", layout: TrackLayout, v_max: float = 28.0) -> CellKey:
    """Map a state to its archive cell."""
    player = state.player
    if state.off_playfield:
        diagnostics["off_playfield"] += 1
        logger.debug("State at (%.2f, %.2f) is off the playfield, using nearest sub-segment", player.x, player.y)

    tp = layout.project(player.x, player.y)
    sub_segment = layout.sub_segment(tp.segment, tp.lateral)

    heading_error = math.atan2(math.sin(player.heading - tp.heading), math.cos(player.heading - tp.heading))

    proximity = False
    for opp in state.opponents:
        op = layout.project(opp.x, opp.y)
        if layout.sub_segment(op.segment, op.lateral) == sub_segment:
            proximity = True
            break

    return CellKey(
        lap=state.lap,
        sub_segment=sub_segment,
        speed_bucket=SpeedBucket.FAST if player.speed >= v_max / 2.0 else SpeedBucket.SLOW,
        rotation_bucket=rotation_bucket(heading_error),
        proximity=proximity,
    )


def key_space_size(layout: TrackLayout) -> int:
    """2 laps x sub-segments x 2 speeds x 6 rotations x 2 proximity flags."""
    return LAPS * layout.sub_segment_count * len(SpeedBucket) * ROTATION_BUCKETS * 2


def lap_key_space_size(layout: TrackLayout) -> int:
    return key_space_size(layout) // LAPS


def enumerate_cell_keys(layout: TrackLayout) -> Iterator[CellKey]:
    for lap in range(1, LAPS + 1):
        for sub in range(layout.sub_segment_count):
            for speed in SpeedBucket:
                for rot in range(ROTATION_BUCKETS):
                    for prox in (False, True):
                        yield CellKey(lap, sub, speed, rot, prox)
