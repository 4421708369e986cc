"""Track layout loading and centerline geometry for Goblend."""
import json
import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from goblend.errors import TrackParseError, TrackValidationError

logger = logging.getLogger(__name__)

TRACK_FORMAT = "goblend-track"
TRACK_VERSION = 1
DEFAULT_TRACK_PATH = Path(__file__).parent / "data" / "default_track.json"

CHECKPOINTS_PER_LAP = 8
SUB_SEGMENTS_PER_SEGMENT = 4

# Joint tolerance between consecutive segments and loop closure tolerance (meters)
JOINT_TOLERANCE = 1e-6
CLOSURE_TOLERANCE = 1e-3


class SegmentShape(Enum):
    """High-level segment structure."""
    STRAIGHT = "straight"
    HALF_CURVE = "half-curve"
    FULL_CURVE = "full-curve"


class SubSegment(Enum):
    """Position of a car within a segment."""
    ON_ROAD_LEFT = 0
    ON_ROAD_RIGHT = 1
    OFF_ROAD_LEFT = 2
    OFF_ROAD_RIGHT = 3


@dataclass(eq=False)
class Segment:
    """One track segment with its centerline polyline."""
    index: int
    shape: SegmentShape
    points: np.ndarray
    half_width: float
    grass_width: float
    radius: Optional[float] = None

    @property
    def barrier(self) -> float:
        """Lateral offset of the barrier from the centerline."""
        return self.half_width + self.grass_width

    @property
    def is_curve(self) -> bool:
        return self.shape is not SegmentShape.STRAIGHT


@dataclass(frozen=True)
class TrackPoint:
    """Projection of a point onto the centerline."""
    segment: int
    s: float
    lateral: float
    heading: float
    foot_x: float
    foot_y: float


@dataclass(eq=False)
class TrackLayout:
    """A validated closed circuit."""
    name: str
    segments: List[Segment]
    checkpoints: List[int]
    opponent_waypoints: np.ndarray
    bounds: Tuple[float, float, float, float]
    start_s: float = 1.0

    # Derived geometry, filled by __post_init__
    total_length: float = field(init=False)
    segment_start_s: np.ndarray = field(init=False)

    def __post_init__(self):
        starts, heads, dirs, seg_ids, s0, lengths = [], [], [], [], [], []
        running = 0.0
        seg_start = []
        for seg in self.segments:
            seg_start.append(running)
            pts = seg.points
            for a, b in zip(pts[:-1], pts[1:]):
                d = b - a
                length = float(math.hypot(d[0], d[1]))
                if length == 0.0:
                    continue
                starts.append(a)
                dirs.append(d)
                heads.append(math.atan2(d[1], d[0]))
                seg_ids.append(seg.index)
                s0.append(running)
                lengths.append(length)
                running += length
        self.total_length = running
        self.segment_start_s = np.asarray(seg_start, dtype=float)
        self._edge_a = np.asarray(starts, dtype=float)
        self._edge_d = np.asarray(dirs, dtype=float)
        self._edge_len2 = np.einsum("ij,ij->i", self._edge_d, self._edge_d)
        self._edge_len = np.asarray(lengths, dtype=float)
        self._edge_s0 = np.asarray(s0, dtype=float)
        self._edge_heading = np.asarray(heads, dtype=float)
        self._edge_segment = np.asarray(seg_ids, dtype=int)
        self._edge_s0_list = list(s0)

        # Opponent rail
        wp = self.opponent_waypoints
        closed = np.vstack([wp, wp[:1]])
        seg_len = np.hypot(*np.diff(closed, axis=0).T)
        self._rail_points = closed
        self._rail_s0 = [0.0] + list(np.cumsum(seg_len)[:-1])
        self._rail_len = [float(v) for v in seg_len]
        self.rail_length = float(seg_len.sum())

    # ==================== PROPERTIES ====================

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    @property
    def sub_segment_count(self) -> int:
        """Number of distinct sub-segment ids (S)."""
        return self.segment_count * SUB_SEGMENTS_PER_SEGMENT

    def barrier(self, segment: int) -> float:
        return self.segments[segment].barrier

    def half_width(self, segment: int) -> float:
        return self.segments[segment].half_width

    def gate_s(self, gate: int) -> float:
        """Arc length of a checkpoint gate (gates sit at segment starts)."""
        return float(self.segment_start_s[self.checkpoints[gate]])

    def within_bounds(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax

    # ==================== GEOMETRY ====================

    def project(self, x: float, y: float) -> TrackPoint:
        """Project a point onto the nearest centerline edge."""
        a = self._edge_a
        d = self._edge_d
        rx = x - a[:, 0]
        ry = y - a[:, 1]
        t = (rx * d[:, 0] + ry * d[:, 1]) / self._edge_len2
        np.clip(t, 0.0, 1.0, out=t)
        ex = rx - t * d[:, 0]
        ey = ry - t * d[:, 1]
        dist2 = ex * ex + ey * ey
        i = int(np.argmin(dist2))

        ti = float(t[i])
        dx, dy = float(d[i, 0]), float(d[i, 1])
        cross = dx * float(ry[i]) - dy * float(rx[i])
        magnitude = math.sqrt(float(dist2[i]))
        lateral = magnitude if cross >= 0.0 else -magnitude
        s = float(self._edge_s0[i]) + ti * float(self._edge_len[i])
        return TrackPoint(
            segment=int(self._edge_segment[i]),
            s=s,
            lateral=lateral,
            heading=float(self._edge_heading[i]),
            foot_x=float(a[i, 0]) + ti * dx,
            foot_y=float(a[i, 1]) + ti * dy,
        )

    def point_at(self, s: float, lateral: float = 0.0) -> Tuple[float, float, float]:
        """Centerline pose (x, y, heading) at arc length s, shifted left by lateral."""
        s = s % self.total_length
        i = max(bisect_right(self._edge_s0_list, s) - 1, 0)
        ti = (s - self._edge_s0[i]) / self._edge_len[i]
        ax, ay = self._edge_a[i]
        dx, dy = self._edge_d[i]
        heading = float(self._edge_heading[i])
        x = float(ax + ti * dx) - math.sin(heading) * lateral
        y = float(ay + ti * dy) + math.cos(heading) * lateral
        return x, y, heading

    def segment_at(self, s: float) -> Segment:
        """Segment containing centerline arc length s."""
        s = s % self.total_length
        i = int(np.searchsorted(self.segment_start_s, s, side="right")) - 1
        return self.segments[max(i, 0)]

    def rail_pose(self, s: float) -> Tuple[float, float, float]:
        """Opponent waypoint pose (x, y, heading) at rail arc length s."""
        s = s % self.rail_length
        i = max(bisect_right(self._rail_s0, s) - 1, 0)
        p0 = self._rail_points[i]
        p1 = self._rail_points[i + 1]
        ti = (s - self._rail_s0[i]) / self._rail_len[i]
        dx = float(p1[0] - p0[0])
        dy = float(p1[1] - p0[1])
        return float(p0[0]) + ti * dx, float(p0[1]) + ti * dy, math.atan2(dy, dx)

    def sub_segment(self, segment: int, lateral: float) -> int:
        """Sub-segment id for a lateral offset within a segment."""
        left = lateral >= 0.0
        off_road = abs(lateral) > self.segments[segment].half_width
        if off_road:
            part = SubSegment.OFF_ROAD_LEFT if left else SubSegment.OFF_ROAD_RIGHT
        else:
            part = SubSegment.ON_ROAD_LEFT if left else SubSegment.ON_ROAD_RIGHT
        return segment * SUB_SEGMENTS_PER_SEGMENT + part.value

    def centerline(self) -> np.ndarray:
        """All centerline vertices, closed."""
        pts = [self.segments[0].points[:1]]
        for seg in self.segments:
            pts.append(seg.points[1:])
        return np.vstack(pts)


# ==================== LOADING ====================


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TrackParseError(f"{what} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise TrackParseError(f"{what} must be finite")
    return float(value)


def _arc_points(x: float, y: float, heading: float, radius: float, angle: float,
                step: float) -> Tuple[List[Tuple[float, float]], float]:
    """Turtle arc; positive angle turns left."""
    sign = 1.0 if angle > 0 else -1.0
    cx = x - sign * radius * math.sin(heading)
    cy = y + sign * radius * math.cos(heading)
    count = max(1, int(math.ceil(abs(angle) / step - 1e-9)))
    points = [(x, y)]
    for k in range(1, count + 1):
        h = heading + angle * k / count
        points.append((cx + sign * radius * math.sin(h), cy - sign * radius * math.cos(h)))
    return points, heading + angle


def _segment_points(raw: Dict[str, Any], cursor: Tuple[float, float, float], arc_step: float,
                    where: str) -> Tuple[np.ndarray, Optional[float], Tuple[float, float, float]]:
    """Expand a segment record into its polyline; returns the new turtle cursor."""
    x, y, heading = cursor
    if "points" in raw:
        pts = raw["points"]
        if not isinstance(pts, list) or len(pts) < 2:
            raise TrackParseError(f"{where}: 'points' needs at least two vertices")
        try:
            arr = np.asarray([[_number(p[0], where), _number(p[1], where)] for p in pts], dtype=float)
        except (TypeError, IndexError, KeyError) as e:
            raise TrackParseError(f"{where}: malformed polyline ({e})") from e
        tail = arr[-1] - arr[-2]
        return arr, raw.get("radius"), (float(arr[-1, 0]), float(arr[-1, 1]), math.atan2(tail[1], tail[0]))

    shape = raw.get("shape")
    if shape == SegmentShape.STRAIGHT.value:
        length = _number(raw.get("length"), f"{where}.length")
        if length <= 0:
            raise TrackParseError(f"{where}: length must be positive")
        end = (x + length * math.cos(heading), y + length * math.sin(heading))
        return np.asarray([(x, y), end], dtype=float), None, (end[0], end[1], heading)

    radius = _number(raw.get("radius"), f"{where}.radius")
    angle = math.radians(_number(raw.get("angle_deg"), f"{where}.angle_deg"))
    if radius <= 0 or angle == 0:
        raise TrackParseError(f"{where}: curves need a positive radius and a non-zero angle")
    pts, new_heading = _arc_points(x, y, heading, radius, angle, arc_step)
    return np.asarray(pts, dtype=float), radius, (pts[-1][0], pts[-1][1], new_heading)


def _offset_polyline(points: np.ndarray, offset: float) -> np.ndarray:
    """Shift a closed polyline to the left by offset using vertex normals."""
    nxt = np.roll(points, -1, axis=0)
    prv = np.roll(points, 1, axis=0)
    tangent = nxt - prv
    norm = np.hypot(tangent[:, 0], tangent[:, 1])[:, None]
    tangent = tangent / norm
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
    return points + offset * normal


def parse_track(data: Dict[str, Any]) -> TrackLayout:
    """Build and validate a layout from a decoded track document."""
    if not isinstance(data, dict):
        raise TrackParseError("track document must be an object")
    if data.get("format") != TRACK_FORMAT:
        raise TrackParseError(f"unknown track format {data.get('format')!r}")
    if data.get("version") != TRACK_VERSION:
        raise TrackParseError(f"unsupported track version {data.get('version')!r}")

    raw_segments = data.get("segments")
    if not isinstance(raw_segments, list) or not raw_segments:
        raise TrackParseError("track needs a non-empty 'segments' list")

    start = data.get("start", {})
    cursor = (
        _number(start.get("x", 0.0), "start.x"),
        _number(start.get("y", 0.0), "start.y"),
        math.radians(_number(start.get("heading_deg", 0.0), "start.heading_deg")),
    )
    default_hw = _number(data.get("half_width", 8.0), "half_width")
    default_grass = _number(data.get("grass_width", 6.0), "grass_width")
    arc_step = math.radians(_number(data.get("arc_step_deg", 3.75), "arc_step_deg"))

    segments: List[Segment] = []
    for i, raw in enumerate(raw_segments):
        where = f"segments[{i}]"
        if not isinstance(raw, dict):
            raise TrackParseError(f"{where} must be an object")
        try:
            shape = SegmentShape(raw.get("shape"))
        except ValueError as e:
            raise TrackParseError(f"{where}: unknown shape {raw.get('shape')!r}") from e
        points, radius, cursor = _segment_points(raw, cursor, arc_step, where)
        segments.append(Segment(
            index=i,
            shape=shape,
            points=points,
            half_width=_number(raw.get("half_width", default_hw), f"{where}.half_width"),
            grass_width=_number(raw.get("grass_width", default_grass), f"{where}.grass_width"),
            radius=radius,
        ))

    _validate_loop(segments)

    checkpoints = data.get("checkpoints")
    if not isinstance(checkpoints, list) or not all(isinstance(c, int) for c in checkpoints):
        raise TrackParseError("'checkpoints' must be a list of segment indices")
    _validate_checkpoints(checkpoints, len(segments))

    layout_points = np.vstack([segments[0].points[:1]] + [s.points[1:] for s in segments])[:-1]
    if "opponent_waypoints" in data:
        try:
            waypoints = np.asarray(data["opponent_waypoints"], dtype=float)
        except (TypeError, ValueError) as e:
            raise TrackParseError(f"malformed opponent_waypoints ({e})") from e
        if waypoints.ndim != 2 or waypoints.shape[1] != 2 or len(waypoints) < 3:
            raise TrackParseError("opponent_waypoints must be a list of at least three [x, y] pairs")
    else:
        lane = _number(data.get("opponent_lane_offset", 2.5), "opponent_lane_offset")
        waypoints = _offset_polyline(layout_points, lane)

    bounds = data.get("bounds")
    if bounds is None:
        margin = max(s.barrier for s in segments) + 10.0
        bounds = [
            float(layout_points[:, 0].min() - margin), float(layout_points[:, 1].min() - margin),
            float(layout_points[:, 0].max() + margin), float(layout_points[:, 1].max() + margin),
        ]
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise TrackParseError("'bounds' must be [xmin, ymin, xmax, ymax]")
    bounds_t = tuple(_number(b, "bounds") for b in bounds)
    xmin, ymin, xmax, ymax = bounds_t
    if not (np.all(layout_points[:, 0] >= xmin) and np.all(layout_points[:, 0] <= xmax)
            and np.all(layout_points[:, 1] >= ymin) and np.all(layout_points[:, 1] <= ymax)):
        raise TrackValidationError("centerline leaves the playfield bounds")

    layout = TrackLayout(
        name=str(data.get("name", "unnamed")),
        segments=segments,
        checkpoints=list(checkpoints),
        opponent_waypoints=waypoints,
        bounds=bounds_t,
        start_s=_number(data.get("start_s", 1.0), "start_s"),
    )
    logger.info(
        "Loaded track %s: %d segments, %d sub-segments, %.1f m per lap",
        layout.name, layout.segment_count, layout.sub_segment_count, layout.total_length,
    )
    return layout


def _validate_loop(segments: Sequence[Segment]):
    """Segments must chain end-to-start and close back on the first segment."""
    for prev, seg in zip(segments[:-1], segments[1:]):
        gap = float(np.hypot(*(seg.points[0] - prev.points[-1])))
        if gap > JOINT_TOLERANCE:
            raise TrackValidationError(
                f"segment {seg.index} does not start where segment {prev.index} ends (gap {gap:.6f} m)"
            )
    gap = float(np.hypot(*(segments[0].points[0] - segments[-1].points[-1])))
    if gap > CLOSURE_TOLERANCE:
        raise TrackValidationError(f"track is not a closed loop (gap {gap:.3f} m)")


def _validate_checkpoints(checkpoints: List[int], segment_count: int):
    if len(checkpoints) != CHECKPOINTS_PER_LAP:
        raise TrackValidationError(
            f"expected {CHECKPOINTS_PER_LAP} checkpoints per lap, got {len(checkpoints)}"
        )
    if any(c < 0 or c >= segment_count for c in checkpoints):
        raise TrackValidationError("checkpoint refers to a missing segment")
    if len(set(checkpoints)) != len(checkpoints):
        raise TrackValidationError("checkpoints must be distinct")
    # Gates must go once around the loop in driving order
    steps = [(b - a) % segment_count for a, b in zip(checkpoints, checkpoints[1:] + checkpoints[:1])]
    if sum(steps) != segment_count:
        raise TrackValidationError("checkpoints are not ordered along the driving direction")


def load_track(path: Optional[Union[str, Path]] = None) -> TrackLayout:
    """Load a track file (the bundled default track when path is None)."""
    path = Path(path) if path else DEFAULT_TRACK_PATH
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise TrackParseError(f"{path}: {e}") from e
    return parse_track(data)
