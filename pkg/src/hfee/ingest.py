"""Parsing and validation of the per-subject raw sensor logs.

A subject directory holds five CSV streams::

    hf.csv           timestamp_s,heat_flux_w_m2
    temp.csv         timestamp_s,temp_c
    rr.csv           beat_time_s,rr_ms
    calorimeter.csv  breath_time_s,ee_w
    activities.csv   start_s,end_s,activity

Timestamps are re-based so the earliest value across all five files is 0.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyStream, MalformedRow, MissingFile, NonMonotoneTime

log = logging.getLogger(__name__)

NOMINAL_RATE_HZ = 20.0
RATE_BAND_S = (0.045, 0.055)
GAP_THRESHOLD_S = 0.25


class ActivityLabel(str, enum.Enum):
    SITTING = "sitting"
    STANDING = "standing"
    WALKING = "walking"
    CYCLING = "cycling"
    ARM_ERGOMETRY = "arm_ergometry"

    @property
    def is_low_intensity(self) -> bool:
        return self in LOW_INTENSITY


LOW_INTENSITY = frozenset(
    {ActivityLabel.SITTING, ActivityLabel.STANDING, ActivityLabel.WALKING}
)

HF_FILE = "hf.csv"
TEMP_FILE = "temp.csv"
RR_FILE = "rr.csv"
CALORIMETER_FILE = "calorimeter.csv"
ACTIVITIES_FILE = "activities.csv"

HEADERS = {
    HF_FILE: "timestamp_s,heat_flux_w_m2",
    TEMP_FILE: "timestamp_s,temp_c",
    RR_FILE: "beat_time_s,rr_ms",
    CALORIMETER_FILE: "breath_time_s,ee_w",
    ACTIVITIES_FILE: "start_s,end_s,activity",
}


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Stream:
    """Timestamped scalar samples; ``t`` strictly increasing."""

    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t))
        object.__setattr__(self, "v", _frozen(self.v))
        if self.t.shape != self.v.shape or self.t.ndim != 1:
            raise ValueError("t and v must be 1-D arrays of equal length")

    def __len__(self):
        return len(self.t)

    def shifted(self, dt: float) -> "Stream":
        return Stream(self.t + dt, self.v)

    def __eq__(self, other):
        if not isinstance(other, Stream):
            return NotImplemented
        return np.array_equal(self.t, other.t) and np.array_equal(self.v, other.v)

    __hash__ = None


@dataclass(frozen=True)
class Activity:
    start: float
    end: float
    label: ActivityLabel


@dataclass(frozen=True, eq=False)
class SensorRecording:
    subject_id: str
    hf: Stream
    temp: Stream
    rr: Stream
    breaths: Stream
    activities: tuple[Activity, ...]
    # absolute time of the re-based zero, 0.0 if never re-based
    time_origin: float = 0.0

    def shifted(self, dt: float) -> "SensorRecording":
        return SensorRecording(
            self.subject_id,
            self.hf.shifted(dt),
            self.temp.shifted(dt),
            self.rr.shifted(dt),
            self.breaths.shifted(dt),
            tuple(Activity(a.start + dt, a.end + dt, a.label) for a in self.activities),
            self.time_origin - dt,
        )

    def start_time(self) -> float:
        firsts = [s.t[0] for s in (self.hf, self.temp, self.rr, self.breaths) if len(s)]
        if self.activities:
            firsts.append(self.activities[0].start)
        return float(min(firsts))

    def end_time(self) -> float:
        lasts = [s.t[-1] for s in (self.hf, self.temp, self.rr, self.breaths) if len(s)]
        if self.activities:
            lasts.append(self.activities[-1].end)
        return float(max(lasts))

    def __eq__(self, other):
        if not isinstance(other, SensorRecording):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.hf == other.hf
            and self.temp == other.temp
            and self.rr == other.rr
            and self.breaths == other.breaths
            and self.activities == other.activities
            and self.time_origin == other.time_origin
        )

    __hash__ = None


# ---------------------------------------------------------------- parsing


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise MissingFile(f"required stream file missing: {path}")
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _check_header(path: Path, lines: list[str]) -> None:
    expected = HEADERS[path.name]
    if not lines:
        raise EmptyStream(f"{path}: file is empty (expected header {expected!r})")
    if lines[0].rstrip("\r") != expected:
        raise MalformedRow(path, 1, f"header {lines[0]!r} != {expected!r}")


def _parse_float(path, lineno, token) -> float:
    try:
        x = float(token)
    except ValueError:
        raise MalformedRow(path, lineno, f"non-numeric field {token!r}") from None
    if not math.isfinite(x):
        raise MalformedRow(path, lineno, f"non-finite value {token!r}")
    return x


def _scan_pairs(path: Path, lines: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Line-by-line parse; slow, but names the offending line."""
    n = len(lines) - 1
    t = np.empty(n)
    v = np.empty(n)
    prev = -math.inf
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(path, lineno, f"expected 2 columns, got {len(parts)}")
        ti = _parse_float(path, lineno, parts[0])
        vi = _parse_float(path, lineno, parts[1])
        if ti <= prev:
            raise NonMonotoneTime(path, lineno)
        prev = ti
        t[i] = ti
        v[i] = vi
    return t, v


def _read_pairs(path: Path) -> tuple[np.ndarray, np.ndarray]:
    lines = _read_lines(path)
    _check_header(path, lines)
    n = len(lines) - 1
    if n == 0:
        raise EmptyStream(f"{path}: no data rows")
    try:
        data = np.loadtxt(lines[1:], delimiter=",", comments=None, dtype=float, ndmin=2)
    except ValueError:
        data = None
    if data is None or data.shape != (n, 2) or not np.isfinite(data).all():
        return _scan_pairs(path, lines)
    t, v = data[:, 0].copy(), data[:, 1].copy()
    back = np.flatnonzero(np.diff(t) <= 0)
    if len(back):
        raise NonMonotoneTime(path, int(back[0]) + 3)
    return t, v


def _read_activities(path: Path) -> list[Activity]:
    lines = _read_lines(path)
    _check_header(path, lines)
    if len(lines) == 1:
        raise EmptyStream(f"{path}: no data rows")
    out = []
    prev_end = -math.inf
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        parts = line.split(",")
        if len(parts) != 3:
            raise MalformedRow(path, lineno, f"expected 3 columns, got {len(parts)}")
        start = _parse_float(path, lineno, parts[0])
        end = _parse_float(path, lineno, parts[1])
        try:
            label = ActivityLabel(parts[2].rstrip("\r"))
        except ValueError:
            raise MalformedRow(path, lineno, f"unknown activity {parts[2]!r}") from None
        if end <= start:
            raise MalformedRow(path, lineno, "activity end must exceed start")
        if start < prev_end:
            raise NonMonotoneTime(path, lineno, "activity overlaps or precedes the previous one")
        prev_end = end
        out.append(Activity(start, end, label))
    return out


def parse_recording(dir_path, subject_id: str | None = None) -> SensorRecording:
    """Read the five stream files of one subject and re-base time to zero.

    Raises MissingFile, MalformedRow, NonMonotoneTime or EmptyStream.
    """
    d = Path(dir_path)
    if subject_id is None:
        subject_id = d.name
    hf_t, hf_v = _read_pairs(d / HF_FILE)
    tp_t, tp_v = _read_pairs(d / TEMP_FILE)
    rr_t, rr_v = _read_pairs(d / RR_FILE)
    if np.any(rr_v <= 0):
        line = int(np.argmax(rr_v <= 0)) + 2
        raise MalformedRow(d / RR_FILE, line, "rr interval must be positive")
    br_t, br_v = _read_pairs(d / CALORIMETER_FILE)
    acts = _read_activities(d / ACTIVITIES_FILE)

    t0 = min(hf_t[0], tp_t[0], rr_t[0], br_t[0], acts[0].start)
    if t0 != 0.0:
        hf_t, tp_t, rr_t, br_t = hf_t - t0, tp_t - t0, rr_t - t0, br_t - t0
        acts = [Activity(a.start - t0, a.end - t0, a.label) for a in acts]
    return SensorRecording(
        subject_id=subject_id,
        hf=Stream(hf_t, hf_v),
        temp=Stream(tp_t, tp_v),
        rr=Stream(rr_t, rr_v),
        breaths=Stream(br_t, br_v),
        activities=tuple(acts),
        time_origin=float(t0),
    )


# ------------------------------------------------------------ serializing


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips the double
    return repr(float(x))


def write_stream(path, header: str, stream: Stream) -> None:
    body = "\n".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(stream.t.tolist(), stream.v.tolist()))
    Path(path).write_text(f"{header}\n{body}\n", encoding="utf-8", newline="\n")


def write_activities(path, activities) -> None:
    rows = [HEADERS[ACTIVITIES_FILE]]
    rows += [f"{_fmt(a.start)},{_fmt(a.end)},{a.label.value}" for a in activities]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8", newline="\n")


def write_recording(rec: SensorRecording, dir_path) -> Path:
    """Serialize ``rec`` into the five-file directory layout."""
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    write_stream(d / HF_FILE, HEADERS[HF_FILE], rec.hf)
    write_stream(d / TEMP_FILE, HEADERS[TEMP_FILE], rec.temp)
    write_stream(d / RR_FILE, HEADERS[RR_FILE], rec.rr)
    write_stream(d / CALORIMETER_FILE, HEADERS[CALORIMETER_FILE], rec.breaths)
    write_activities(d / ACTIVITIES_FILE, rec.activities)
    return d


# ------------------------------------------------------------- validation


@dataclass(frozen=True)
class StreamRate:
    name: str
    n_samples: int
    mean_interval: float
    gap_count: int
    out_of_band: bool


@dataclass(frozen=True)
class ValidationSummary:
    subject_id: str
    streams: tuple[StreamRate, ...] = field(default_factory=tuple)

    @property
    def flagged(self) -> list[str]:
        return [s.name for s in self.streams if s.out_of_band]

    @property
    def ok(self) -> bool:
        return not self.flagged


def _stream_rate(name: str, t: np.ndarray) -> StreamRate:
    if len(t) < 2:
        return StreamRate(name, len(t), math.nan, 0, True)
    dt = np.diff(t)
    mean = float(dt.mean())
    lo, hi = RATE_BAND_S
    return StreamRate(
        name=name,
        n_samples=len(t),
        mean_interval=mean,
        gap_count=int(np.count_nonzero(dt > GAP_THRESHOLD_S)),
        out_of_band=not (lo <= mean <= hi),
    )


def validate_rates(rec: SensorRecording) -> ValidationSummary:
    """Check the continuous 20 Hz streams; out-of-band rates only warn."""
    summary = ValidationSummary(
        rec.subject_id,
        (_stream_rate("hf", rec.hf.t), _stream_rate("temp", rec.temp.t)),
    )
    for s in summary.streams:
        if s.out_of_band:
            log.warning(
                "%s: %s mean interval %.4f s outside %s",
                rec.subject_id, s.name, s.mean_interval, RATE_BAND_S,
            )
    return summary
