"""SVG rendering of a trajectory colored by arousal."""
import logging
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import LineCollection  # noqa: E402
from matplotlib.colors import LinearSegmentedColormap, Normalize  # noqa: E402

from goblend.env.racing import RacingEnv  # noqa: E402
from goblend.env.track import TrackLayout  # noqa: E402

logger = logging.getLogger(__name__)

AROUSAL_CMAP = LinearSegmentedColormap.from_list("arousal", ["blue", "red"])
VERTEX_GID = "trajectory-vertices"


def arousal_colors(arousal: Sequence[float]) -> np.ndarray:
    """RGBA per window: the trace minimum is pure blue, its maximum pure red."""
    values = np.asarray(arousal, dtype=float)
    norm = Normalize(vmin=float(values.min()), vmax=float(values.max()))
    return AROUSAL_CMAP(norm(values))


def trajectory_positions(actions: Sequence[Sequence[int]], env: RacingEnv, seed: int) -> np.ndarray:
    """Player position after every window of a replay."""
    return np.array([(s.player.x, s.player.y) for s in env.rollout(seed, actions)], dtype=float).reshape(-1, 2)


def _road_edges(layout: TrackLayout):
    center = layout.centerline()
    tangent = np.gradient(center, axis=0)
    tangent /= np.hypot(tangent[:, 0], tangent[:, 1])[:, None]
    normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
    width = np.array([layout.half_width(layout.project(x, y).segment) for x, y in center])[:, None]
    return center + normal * width, center - normal * width


def render_trace(positions: np.ndarray, arousal: Sequence[float], layout: TrackLayout,
                 path: Union[str, Path]) -> Path:
    """Draw the track and the trajectory, one colored vertex per window."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    arousal = np.asarray(arousal, dtype=float)
    if len(positions) != len(arousal):
        raise ValueError(f"{len(positions)} positions but {len(arousal)} arousal values")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(8, 6))
    center = layout.centerline()
    left, right = _road_edges(layout)
    ax.plot(center[:, 0], center[:, 1], color="0.75", linewidth=0.8, linestyle="--")
    ax.plot(left[:, 0], left[:, 1], color="0.3", linewidth=1.0)
    ax.plot(right[:, 0], right[:, 1], color="0.3", linewidth=1.0)

    if len(positions):
        colors = arousal_colors(arousal)
        if len(positions) > 1:
            segments = np.stack([positions[:-1], positions[1:]], axis=1)
            ax.add_collection(LineCollection(segments, colors=colors[:-1], linewidths=1.5))
        scatter = ax.scatter(positions[:, 0], positions[:, 1], c=colors, s=6, zorder=3)
        scatter.set_gid(VERTEX_GID)

    xmin, ymin, xmax, ymax = layout.bounds
    ax.set_xlim(xmin, xmax)
    ax.set_ylim(ymin, ymax)
    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    logger.info("Rendered %d windows to %s", len(positions), path)
    return path
