import shutil
from pathlib import Path

import numpy as np
import pytest

from hfee.errors import EmptyStream, MalformedRow, MissingFile, NonMonotoneTime
from hfee.ingest import (
    ACTIVITIES_FILE,
    HEADERS,
    LOW_INTENSITY,
    ActivityLabel,
    Activity,
    SensorRecording,
    Stream,
    parse_recording,
    validate_rates,
    write_recording,
)

GOLDEN = Path(__file__).parent / "fixtures" / "golden" / "S01"


@pytest.fixture
def golden(tmp_path):
    d = tmp_path / "S01"
    shutil.copytree(GOLDEN, d)
    return d


def test_activity_labels():
    assert len(ActivityLabel) == 5
    assert LOW_INTENSITY == {ActivityLabel.SITTING, ActivityLabel.STANDING, ActivityLabel.WALKING}
    assert ActivityLabel.WALKING.is_low_intensity
    assert not ActivityLabel.CYCLING.is_low_intensity


def test_parse_golden_values():
    rec = parse_recording(GOLDEN, "S01")
    assert rec.subject_id == "S01"
    assert rec.hf.t.tolist() == [0.0, 0.05, 0.1]
    assert rec.hf.v.tolist() == [41.25, 41.300000000000004, -3.5e-05]
    assert rec.temp.v.tolist() == [29.125, 29.1251, 29.13]
    assert rec.rr.t.tolist() == [0.4, 1.2125, 2.0125]
    assert rec.rr.v.tolist() == [812.5, 800.0, 1000.0]
    assert rec.breaths.v.tolist() == [104.2, 98.75, 110.0]
    assert rec.activities == (
        Activity(0.0, 300.0, ActivityLabel.SITTING),
        Activity(300.0, 600.0, ActivityLabel.WALKING),
        Activity(600.0, 900.0, ActivityLabel.ARM_ERGOMETRY),
    )
    assert rec.time_origin == 0.0


def test_subject_id_defaults_to_directory_name():
    assert parse_recording(GOLDEN).subject_id == "S01"


def test_golden_round_trip_is_byte_exact(tmp_path):
    rec = parse_recording(GOLDEN, "S01")
    out = write_recording(rec, tmp_path / "out")
    for name in HEADERS:
        assert (out / name).read_bytes() == (GOLDEN / name).read_bytes(), name


def test_parse_is_deterministic():
    assert parse_recording(GOLDEN) == parse_recording(GOLDEN)


def test_arrays_are_read_only():
    rec = parse_recording(GOLDEN)
    with pytest.raises(ValueError):
        rec.hf.v[0] = 1.0


def _shift_file(path, dt, ncols_time=1):
    lines = path.read_text().splitlines()
    out = [lines[0]]
    for line in lines[1:]:
        parts = line.split(",")
        for i in range(ncols_time):
            parts[i] = repr(float(parts[i]) + dt)
        out.append(",".join(parts))
    path.write_text("\n".join(out) + "\n")


def test_rebase_shifts_by_earliest_time(golden):
    for name in HEADERS:
        _shift_file(golden / name, 100.0, 2 if name == ACTIVITIES_FILE else 1)
    ref = parse_recording(GOLDEN)
    rec = parse_recording(golden)
    assert rec.time_origin == 100.0
    raw_hf_t = np.array([0.0, 0.05, 0.1]) + 100.0
    assert np.array_equal(rec.hf.t, raw_hf_t - 100.0)
    assert rec.activities[0].start == 0.0
    # intervals preserved within rounding of the shift
    assert np.allclose(np.diff(rec.rr.t), np.diff(ref.rr.t), atol=1e-12)
    assert np.array_equal(rec.hf.v, ref.hf.v)


def test_missing_file(golden):
    (golden / "rr.csv").unlink()
    with pytest.raises(MissingFile, match="rr.csv"):
        parse_recording(golden)


def test_non_monotone_time_names_line(golden):
    (golden / "calorimeter.csv").write_text(
        "breath_time_s,ee_w\n1.0,100.0\n2.0,100.0\n3.0,100.0\n2.5,100.0\n"
    )
    with pytest.raises(NonMonotoneTime) as exc:
        parse_recording(golden)
    assert exc.value.line == 5
    assert "calorimeter.csv:5" in str(exc.value)


def test_duplicate_timestamp_is_non_monotone(golden):
    (golden / "hf.csv").write_text("timestamp_s,heat_flux_w_m2\n0.0,1.0\n0.0,2.0\n")
    with pytest.raises(NonMonotoneTime):
        parse_recording(golden)


@pytest.mark.parametrize(
    "name, body, line",
    [
        ("hf.csv", "timestamp_s,heat_flux_w_m2\n0.0,1.0\n0.05,abc\n", 3),
        ("hf.csv", "timestamp_s,heat_flux_w_m2\n0.0,1.0,2.0\n", 2),
        ("temp.csv", "timestamp_s,temp_c\n0.0,nan\n", 2),
        ("rr.csv", "beat_time_s,rr_ms\n0.5,800\n1.3,-5\n", 3),
        ("temp.csv", "time,temp_c\n0.0,30.0\n", 1),
        ("activities.csv", "start_s,end_s,activity\n0.0,10.0,jogging\n", 2),
        ("activities.csv", "start_s,end_s,activity\n10.0,5.0,sitting\n", 2),
    ],
)
def test_malformed_rows(golden, name, body, line):
    (golden / name).write_text(body)
    with pytest.raises(MalformedRow) as exc:
        parse_recording(golden)
    assert exc.value.line == line
    assert exc.value.path.endswith(name)


def test_overlapping_activities(golden):
    (golden / "activities.csv").write_text(
        "start_s,end_s,activity\n0.0,300.0,sitting\n200.0,400.0,standing\n"
    )
    with pytest.raises(NonMonotoneTime):
        parse_recording(golden)


@pytest.mark.parametrize("body", ["", "timestamp_s,heat_flux_w_m2\n"])
def test_empty_stream(golden, body):
    (golden / "hf.csv").write_text(body)
    with pytest.raises(EmptyStream):
        parse_recording(golden)


def _recording(t):
    s = Stream(t, np.zeros_like(t))
    acts = (Activity(0.0, float(t[-1]) + 1, ActivityLabel.SITTING),)
    return SensorRecording("X", s, s, s, s, acts)


def test_validate_exact_20hz():
    summary = validate_rates(_recording(np.arange(2000) / 20.0))
    hf = summary.streams[0]
    assert hf.name == "hf"
    assert hf.mean_interval == pytest.approx(0.05, abs=1e-12)
    assert hf.gap_count == 0
    assert summary.ok and summary.flagged == []


def test_validate_counts_one_second_hole():
    t = np.arange(2000) / 20.0
    t = np.concatenate([t[:1000], t[1020:]])
    summary = validate_rates(_recording(t))
    assert summary.streams[0].gap_count == 1
    assert summary.ok  # mean interval still within band


def test_validate_flags_10hz(caplog):
    summary = validate_rates(_recording(np.arange(1000) / 10.0))
    assert summary.flagged == ["hf", "temp"]
    assert "outside" in caplog.text


def test_bulk_and_line_parsers_agree(tmp_path):
    from hfee.ingest import _read_pairs, _read_lines, _scan_pairs

    rng = np.random.default_rng(12)
    t = np.cumsum(rng.uniform(0.04, 0.06, 500)) + 1.6e9
    v = rng.normal(40, 10, 500)
    p = tmp_path / "hf.csv"
    p.write_text(HEADERS["hf.csv"] + "\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), v.tolist())))
    fast = _read_pairs(p)
    slow = _scan_pairs(p, _read_lines(p))
    assert np.array_equal(fast[0], slow[0]) and np.array_equal(fast[1], slow[1])
    assert np.array_equal(fast[0], t)
