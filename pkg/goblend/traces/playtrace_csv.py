"""Playtrace CSV persistence: one row per 250 ms window, versioned header line."""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from goblend.env.features import FEATURE_COUNT, FEATURE_NAMES, FEATURE_SCHEMA_VERSION
from goblend.errors import PlaytraceFormatError
from goblend.traces.session import GENERATOR_VERSION, PlaySession, PlaytraceDataset

logger = logging.getLogger(__name__)

HEADER_PREFIX = "# goblend-playtraces"
HEADER = f"{HEADER_PREFIX} schema={FEATURE_SCHEMA_VERSION} features={FEATURE_COUNT} generator={GENERATOR_VERSION}"
REQUIRED_COLUMNS = ["session_id", "window_index", *FEATURE_NAMES, "steer", "gas", "arousal"]
OPTIONAL_COLUMNS = ["tier_hint", "seed"]

# The header line and the column line come before the first data row
FIRST_DATA_LINE = 3


def _parse_header(line: str) -> dict:
    if not line.startswith(HEADER_PREFIX):
        raise PlaytraceFormatError(f"missing '{HEADER_PREFIX}' header line", row=1)
    fields = {}
    for token in line[len(HEADER_PREFIX):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    if fields.get("schema") != str(FEATURE_SCHEMA_VERSION):
        raise PlaytraceFormatError(f"unsupported schema {fields.get('schema')!r}", row=1)
    if fields.get("features") != str(FEATURE_COUNT):
        raise PlaytraceFormatError(f"expected {FEATURE_COUNT} features, header says {fields.get('features')!r}", row=1)
    return fields


def save_sessions(dataset: PlaytraceDataset, path: Union[str, Path]) -> Path:
    """Write every session to one CSV file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frames = []
    for session in dataset:
        n = len(session)
        frame = pd.DataFrame(session.features, columns=FEATURE_NAMES)
        frame.insert(0, "window_index", np.arange(n))
        frame.insert(0, "session_id", session.session_id)
        frame["steer"] = session.actions[:, 0]
        frame["gas"] = session.actions[:, 1]
        frame["arousal"] = session.arousal
        frame["tier_hint"] = session.tier_hint if session.tier_hint is not None else ""
        frame["seed"] = "" if session.seed is None else str(session.seed)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=REQUIRED_COLUMNS + OPTIONAL_COLUMNS)

    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(HEADER + "\n")
        table.to_csv(f, index=False)
    logger.info("Saved %d sessions (%d windows) to %s", len(dataset), len(table), path)
    return path


def load_sessions(path: Union[str, Path]) -> PlaytraceDataset:
    """Read a playtrace CSV written by save_sessions or converted from another source."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\r\n")
    fields = _parse_header(header)
    generator = fields.get("generator", GENERATOR_VERSION)

    table = pd.read_csv(
        path,
        skiprows=1,
        dtype={"session_id": str, "tier_hint": str},
        keep_default_na=False,
        float_precision="round_trip",
    )
    for column in REQUIRED_COLUMNS:
        if column not in table.columns:
            raise PlaytraceFormatError("required column is missing", column=column)

    numeric = REQUIRED_COLUMNS[1:]
    for column in numeric:
        values = pd.to_numeric(table[column], errors="coerce").to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise PlaytraceFormatError("value is missing or not finite", row=int(bad[0]) + FIRST_DATA_LINE, column=column)
        table[column] = values

    for column in ("window_index", "steer", "gas"):
        values = table[column].to_numpy()
        bad = np.flatnonzero(values != np.round(values))
        if bad.size:
            raise PlaytraceFormatError("value must be an integer", row=int(bad[0]) + FIRST_DATA_LINE, column=column)
    for column in ("steer", "gas"):
        bad = np.flatnonzero(~np.isin(table[column].to_numpy(), (-1, 0, 1)))
        if bad.size:
            raise PlaytraceFormatError("input must be -1, 0 or 1", row=int(bad[0]) + FIRST_DATA_LINE, column=column)

    sessions: List[PlaySession] = []
    for session_id, rows in table.groupby("session_id", sort=False):
        first_line = int(rows.index[0]) + FIRST_DATA_LINE
        windows = rows["window_index"].to_numpy(dtype=int)
        expected = np.arange(len(rows))
        mismatch = np.flatnonzero(windows != expected)
        if mismatch.size:
            raise PlaytraceFormatError(
                f"session {session_id}: window_index {windows[mismatch[0]]} out of sequence",
                row=int(rows.index[mismatch[0]]) + FIRST_DATA_LINE, column="window_index",
            )
        if not np.all(np.diff(rows.index.to_numpy()) == 1):
            raise PlaytraceFormatError(f"session {session_id}: rows are not contiguous", row=first_line)

        tier_hint = None
        if "tier_hint" in rows.columns:
            value = str(rows["tier_hint"].iloc[0])
            tier_hint = value or None
        seed = None
        if "seed" in rows.columns:
            value = str(rows["seed"].iloc[0]).strip()
            seed = int(value) if value not in ("", "nan") else None

        try:
            sessions.append(PlaySession(
                session_id=str(session_id),
                features=rows[FEATURE_NAMES].to_numpy(dtype=float),
                actions=rows[["steer", "gas"]].to_numpy(dtype=float).astype(int),
                arousal=rows["arousal"].to_numpy(dtype=float),
                tier_hint=tier_hint,
                seed=seed,
                generator=generator,
            ))
        except ValueError as e:
            raise PlaytraceFormatError(str(e), row=first_line) from e

    dataset = PlaytraceDataset(sessions)
    logger.info("Loaded %d sessions (%d windows) from %s", len(dataset), len(table), path)
    return dataset
