"""Play sessions: synthetic generation, arousal annotation, normalization and CSV persistence."""
from goblend.traces.arousal import AnnotatorProfile, annotate_arousal
from goblend.traces.generator import GeneratorConfig, SkillTier, TierProfile, generate_cohort, generate_session
from goblend.traces.playtrace_csv import load_sessions, save_sessions
from goblend.traces.session import PlaySession, PlaytraceDataset, normalize_trace, truncate_to_laps

__all__ = [
    "AnnotatorProfile",
    "GeneratorConfig",
    "PlaySession",
    "PlaytraceDataset",
    "SkillTier",
    "TierProfile",
    "annotate_arousal",
    "generate_cohort",
    "generate_session",
    "load_sessions",
    "normalize_trace",
    "save_sessions",
    "truncate_to_laps",
]
