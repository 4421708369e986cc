"""Deterministic racing environment: track, simulator, features and cell keys."""
from goblend.env.cells import CellKey, SpeedBucket, discretize, key_space_size
from goblend.env.features import FEATURE_COUNT, FEATURE_NAMES
from goblend.env.racing import Action, CarState, EnvConfig, GameState, RacingEnv
from goblend.env.track import TrackLayout, load_track, parse_track

__all__ = [
    "Action",
    "CarState",
    "CellKey",
    "EnvConfig",
    "FEATURE_COUNT",
    "FEATURE_NAMES",
    "GameState",
    "RacingEnv",
    "SpeedBucket",
    "TrackLayout",
    "discretize",
    "key_space_size",
    "load_track",
    "parse_track",
]
