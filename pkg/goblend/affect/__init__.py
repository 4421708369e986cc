"""Arousal estimation from persona playtraces."""
from goblend.affect.knn import AffectConfig, AffectIndex, Weighting, brute_force_oracle, build_index, estimate_arousal

__all__ = ["AffectConfig", "AffectIndex", "Weighting", "brute_force_oracle", "build_index", "estimate_arousal"]
