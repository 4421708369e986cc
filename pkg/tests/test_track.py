import copy
import json
import math

import numpy as np
import pytest

from goblend.env.track import (
    CHECKPOINTS_PER_LAP,
    DEFAULT_TRACK_PATH,
    SegmentShape,
    SubSegment,
    load_track,
    parse_track,
)
from goblend.errors import TrackParseError, TrackValidationError


@pytest.fixture
def track_doc():
    return json.loads(DEFAULT_TRACK_PATH.read_text(encoding="utf-8"))


def square_doc(**overrides):
    """Four 100 m straights joined by four quarter circles of radius 20."""
    segments = []
    for _ in range(4):
        segments.append({"shape": "straight", "length": 100.0})
        segments.append({"shape": "full-curve", "radius": 20.0, "angle_deg": 90.0})
    doc = {
        "format": "goblend-track",
        "version": 1,
        "name": "square",
        "segments": segments,
        "checkpoints": [0, 1, 2, 3, 4, 5, 6, 7],
    }
    doc.update(overrides)
    return doc


def test_default_track_has_nineteen_segments_and_eight_gates(layout):
    assert layout.segment_count == 19
    assert len(layout.checkpoints) == CHECKPOINTS_PER_LAP
    assert layout.sub_segment_count == 76
    shapes = {s.shape for s in layout.segments}
    assert shapes == {SegmentShape.STRAIGHT, SegmentShape.HALF_CURVE, SegmentShape.FULL_CURVE}


def test_default_track_is_closed(layout):
    first = layout.segments[0].points[0]
    last = layout.segments[-1].points[-1]
    assert math.hypot(*(first - last)) < 1e-3


def test_centerline_points_project_onto_their_own_segment(layout):
    for seg in layout.segments:
        mid = seg.points[len(seg.points) // 2]
        if len(seg.points) == 2:
            mid = seg.points.mean(axis=0)
        tp = layout.project(float(mid[0]), float(mid[1]))
        assert tp.segment == seg.index
        assert abs(tp.lateral) < 1e-9


def test_point_at_and_project_agree(layout):
    for s in np.linspace(0.0, layout.total_length, 37, endpoint=False):
        x, y, _ = layout.point_at(float(s), lateral=3.0)
        tp = layout.project(x, y)
        assert tp.lateral == pytest.approx(3.0, abs=0.01)


def test_sub_segment_ids():
    layout = parse_track(square_doc())
    hw = layout.half_width(2)
    assert layout.sub_segment(2, 0.0) == 2 * 4 + SubSegment.ON_ROAD_LEFT.value
    assert layout.sub_segment(2, -1.0) == 2 * 4 + SubSegment.ON_ROAD_RIGHT.value
    assert layout.sub_segment(2, hw + 0.5) == 2 * 4 + SubSegment.OFF_ROAD_LEFT.value
    assert layout.sub_segment(2, -hw - 0.5) == 2 * 4 + SubSegment.OFF_ROAD_RIGHT.value


def test_explicit_polyline_segments_are_accepted():
    doc = square_doc()
    doc["segments"][0] = {"shape": "straight", "points": [[0.0, 0.0], [50.0, 0.0], [100.0, 0.0]]}
    layout = parse_track(doc)
    assert layout.segments[0].points.shape == (3, 2)


def test_unknown_format_is_rejected(track_doc):
    track_doc["format"] = "something-else"
    with pytest.raises(TrackParseError):
        parse_track(track_doc)


def test_bad_shape_is_rejected(track_doc):
    track_doc["segments"][3]["shape"] = "hairpin"
    with pytest.raises(TrackParseError, match="segments\\[3\\]"):
        parse_track(track_doc)


def test_open_loop_is_rejected(track_doc):
    doc = copy.deepcopy(track_doc)
    doc["segments"] = doc["segments"][:-1]
    doc["checkpoints"] = [c for c in doc["checkpoints"] if c < len(doc["segments"])]
    with pytest.raises(TrackValidationError):
        parse_track(doc)


def test_wrong_checkpoint_count_is_rejected():
    with pytest.raises(TrackValidationError, match="checkpoints"):
        parse_track(square_doc(checkpoints=[0, 1, 2, 3, 4, 5, 6]))


def test_unordered_checkpoints_are_rejected():
    with pytest.raises(TrackValidationError, match="ordered"):
        parse_track(square_doc(checkpoints=[0, 2, 1, 3, 4, 5, 6, 7]))


def test_bounds_must_contain_centerline():
    with pytest.raises(TrackValidationError, match="bounds"):
        parse_track(square_doc(bounds=[0.0, 0.0, 10.0, 10.0]))


def test_load_track_reports_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(TrackParseError):
        load_track(path)
