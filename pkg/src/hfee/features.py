"""30 s feature bins with lagged median windows over heat flux and temperature."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import NoUsableRows
from .ingest import ActivityLabel, SensorRecording, Stream

BIN_S = 30.0
SHORT_WINDOW = (30.0, 90.0)
LONG_WINDOW = (120.0, 420.0)
MIN_HISTORY_S = LONG_WINDOW[1]

FEATURE_HEADER = (
    "bin_end_s,hr_bpm,hf,hf_med_short,hf_med_long,"
    "temp,temp_med_short,temp_med_long,ee_w,activity"
)


@dataclass(frozen=True)
class FeatureRow:
    bin_end: float
    hr: float
    hf: float
    hf_med_short: float
    hf_med_long: float
    temp: float
    temp_med_short: float
    temp_med_long: float
    ee_true: float
    activity: ActivityLabel


NUMERIC_FIELDS = tuple(f.name for f in fields(FeatureRow) if f.name != "activity")


@dataclass(frozen=True)
class FeatureTable:
    subject_id: str
    rows: tuple[FeatureRow, ...]
    dropped_bins: int = 0

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def activities(self) -> list[ActivityLabel]:
        return [r.activity for r in self.rows]

    def filter(self, labels) -> "FeatureTable":
        labels = frozenset(labels)
        return FeatureTable(
            self.subject_id,
            tuple(r for r in self.rows if r.activity in labels),
            self.dropped_bins,
        )

    def with_rows(self, rows) -> "FeatureTable":
        return FeatureTable(self.subject_id, tuple(rows), self.dropped_bins)


def _slice(t: np.ndarray, lo: float, hi: float) -> slice:
    # half-open [lo, hi)
    return slice(int(np.searchsorted(t, lo, "left")), int(np.searchsorted(t, hi, "left")))


def bin_heart_rate(rr: Stream, bin_end: float) -> float | None:
    """Heart rate in beats/min as 60000 / mean RR over beats in ``[bin_end-30, bin_end)``."""
    s = _slice(rr.t, bin_end - BIN_S, bin_end)
    vals = rr.v[s]
    if len(vals) == 0:
        return None
    return 60000.0 / float(vals.mean())


def bin_average(samples: Stream, bin_end: float) -> float | None:
    s = _slice(samples.t, bin_end - BIN_S, bin_end)
    vals = samples.v[s]
    if len(vals) == 0:
        return None
    return float(vals.mean())


def window_median(samples: Stream, bin_end: float, lag_start: float, lag_end: float) -> float | None:
    """Median of samples with timestamp in ``[bin_end - lag_end, bin_end - lag_start)``.

    Even counts average the two middle values. Returns None for an empty window.
    """
    if not lag_start < lag_end:
        raise ValueError("lag_start must be < lag_end")
    s = _slice(samples.t, bin_end - lag_end, bin_end - lag_start)
    vals = samples.v[s]
    if len(vals) == 0:
        return None
    return float(np.median(vals))


def covering_activity(activities, lo: float, hi: float) -> ActivityLabel | None:
    """Label of the single activity interval covering ``[lo, hi)``, else None."""
    hits = [a for a in activities if a.start < hi and a.end > lo]
    if len(hits) != 1:
        return None
    a = hits[0]
    if a.start <= lo and a.end >= hi:
        return a.label
    return None


def bin_ends(rec: SensorRecording) -> np.ndarray:
    """Candidate bin ends: multiples of 30 s with at least 420 s of history."""
    t0, t1 = rec.start_time(), rec.end_time()
    first = math.ceil((t0 + MIN_HISTORY_S) / BIN_S) * BIN_S
    last = math.ceil(t1 / BIN_S) * BIN_S + BIN_S
    if last < first:
        return np.empty(0)
    return np.arange(first, last + BIN_S / 2, BIN_S)


def build_feature_table(rec: SensorRecording) -> FeatureTable:
    """Bin a recording into feature rows, dropping bins that lack any input.

    Raises NoUsableRows when every candidate bin was dropped.
    """
    rows = []
    dropped = 0
    for be in bin_ends(rec):
        be = float(be)
        label = covering_activity(rec.activities, be - BIN_S, be)
        vals = (
            bin_heart_rate(rec.rr, be),
            bin_average(rec.hf, be),
            window_median(rec.hf, be, *SHORT_WINDOW),
            window_median(rec.hf, be, *LONG_WINDOW),
            bin_average(rec.temp, be),
            window_median(rec.temp, be, *SHORT_WINDOW),
            window_median(rec.temp, be, *LONG_WINDOW),
            bin_average(rec.breaths, be),
        )
        if label is None or any(v is None for v in vals):
            dropped += 1
            continue
        rows.append(FeatureRow(be, *vals, activity=label))
    if not rows:
        raise NoUsableRows(f"{rec.subject_id}: no bin has complete data and 420 s of history")
    return FeatureTable(rec.subject_id, tuple(rows), dropped)


def write_feature_table(table: FeatureTable, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [FEATURE_HEADER]
    for r in table.rows:
        d = asdict(r)
        nums = ",".join(repr(float(d[k])) for k in NUMERIC_FIELDS)
        lines.append(f"{nums},{r.activity.value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_feature_table(path, subject_id: str | None = None) -> FeatureTable:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != FEATURE_HEADER:
        raise ValueError(f"{path}: unexpected feature header")
    rows = []
    for line in lines[1:]:
        *nums, act = line.split(",")
        rows.append(FeatureRow(*map(float, nums), activity=ActivityLabel(act)))
    return FeatureTable(subject_id or path.stem, tuple(rows))
