import xml.etree.ElementTree as ET

import numpy as np

from goblend.harness.render import VERTEX_GID, arousal_colors, render_trace, trajectory_positions


def test_gradient_endpoints():
    colors = arousal_colors([0.2, 0.9, 0.5, 0.1])
    assert np.allclose(colors[1], [1.0, 0.0, 0.0, 1.0])
    assert np.allclose(colors[3], [0.0, 0.0, 1.0, 1.0])


def test_svg_has_one_vertex_per_window(tmp_path, env):
    actions = [(0, 1)] * 30 + [(1, 1)] * 10
    positions = trajectory_positions(actions, env, seed=0)
    arousal = np.linspace(0.0, 1.0, len(actions))
    path = render_trace(positions, arousal, env.layout, tmp_path / "trace.svg")

    root = ET.parse(path).getroot()
    groups = [el for el in root.iter() if el.get("id") == VERTEX_GID]
    assert len(groups) == 1
    vertices = [el for el in groups[0].iter() if el.tag.endswith("}use")]
    assert len(vertices) == len(actions)
