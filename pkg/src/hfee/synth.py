"""Seeded synthetic cohorts written in the raw sensor file layout.

The generative model is deliberately simple so that the regression model
class contains the noiseless truth:

* energy expenditure (EE) is a step function on the 30 s grid, driven by the
  activity schedule with first-order on/off kinetics between cells;
* heart rate is affine in EE, with a slow Ornstein-Uhlenbeck fluctuation whose
  SD is multiplied during sitting and standing;
* heat flux is a first-order lag of EE plus a subject gain/offset, a slow
  ambient drift and white sensor noise;
* heat sink temperature is a slower first-order lag of the clean heat flux.

All randomness comes from ``numpy.random.SeedSequence(seed, spawn_key=...)``
so each subject can be generated independently and reproducibly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .ingest import Activity, ActivityLabel, SensorRecording, Stream, write_recording
from .subjects import Gender, SubjectProfile, write_profiles

DEFAULT_SEED = 2020

BIN_S = 30
BOUT_MIN_S, BOUT_MAX_S = 5 * 60, 45 * 60
TOTAL_MIN_S, TOTAL_MAX_S = 96 * 60, 163 * 60
STAGE_S = 300
HF_RATE_HZ = 20
W_PER_MET_KG = 1.163  # 1 kcal/kg/h

# per-stage MET range; sitting and standing are a single stage
MET_RANGE = {
    ActivityLabel.SITTING: (1.2, 1.4),
    ActivityLabel.STANDING: (1.5, 1.9),
    ActivityLabel.WALKING: (3.0, 6.0),
    ActivityLabel.CYCLING: (4.0, 8.0),
    ActivityLabel.ARM_ERGOMETRY: (3.0, 5.5),
}
NOISY_HR_ACTIVITIES = frozenset({ActivityLabel.SITTING, ActivityLabel.STANDING})


@dataclass(frozen=True)
class NoiseProfile:
    hr_sd: float = 3.5  # bpm, slow fluctuation
    hr_tau_s: float = 60.0
    low_intensity_hr_multiplier: float = 3.0
    rr_jitter_sd: float = 15.0  # ms, beat-to-beat
    hr_subject_sd: float = 5.0  # bpm, resting HR offset
    hr_gain_sd: float = 0.20  # relative
    hr_fitness_bpm: float = 1.5  # resting HR drop per activity-level step
    hf_sd: float = 3.0  # W/m^2, white
    hf_drift_sd: float = 12.0  # W/m^2, slow ambient drift
    hf_drift_tau_s: float = 600.0
    hf_subject_sd: float = 5.0  # W/m^2 offset
    hf_gain_sd: float = 0.15  # relative
    temp_sd: float = 0.02  # deg C, white
    temp_subject_sd: float = 0.5  # deg C, ambient offset
    ee_sd: float = 15.0  # W per breath

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"noise parameter {f.name} must be >= 0")
        if self.low_intensity_hr_multiplier < 1:
            raise ValueError("low-intensity HR noise multiplier must be >= 1")
        if self.hr_tau_s <= 0 or self.hf_drift_tau_s <= 0:
            raise ValueError("correlation times must be > 0")

    @classmethod
    def noiseless(cls) -> "NoiseProfile":
        zeros = {
            f.name: 0.0
            for f in dataclasses.fields(cls)
            if f.name not in ("hr_tau_s", "hf_drift_tau_s", "low_intensity_hr_multiplier")
        }
        return cls(**zeros)


@dataclass(frozen=True)
class CohortSpec:
    n_subjects: int = 15
    seed: int = DEFAULT_SEED
    noise: NoiseProfile = field(default_factory=NoiseProfile)
    thermal_lag_s: float = 90.0  # heat flux response to EE
    heatsink_lag_s: float = 400.0  # heat sink temperature response to heat flux
    ee_kinetics_s: float = 40.0
    hr_rest_bpm: float = 50.0
    hr_bpm_per_w: float = 0.17
    hf_base_w_m2: float = 15.0
    hf_w_m2_per_w: float = 0.30
    temp_ambient_c: float = 24.0
    temp_c_per_w_m2: float = 0.12
    # above this EE, extra heat leaves by evaporation and bypasses the sensor
    sweat_onset_w: float = 350.0
    sweat_fraction: float = 0.6
    breath_period_s: float = 3.0

    def __post_init__(self):
        if self.n_subjects < 3:
            raise ValueError("a cohort needs at least 3 subjects for leave-one-subject-out")
        for name in ("thermal_lag_s", "heatsink_lag_s", "ee_kinetics_s", "breath_period_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d) -> "CohortSpec":
        d = dict(d)
        d["noise"] = NoiseProfile(**d.get("noise", {}))
        return cls(**d)


@dataclass(frozen=True)
class Bout:
    start: float
    end: float
    label: ActivityLabel

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, eq=False)
class GroundTruth:
    subject_id: str
    cell_ee: np.ndarray  # W, one value per 30 s cell starting at t = 0
    params: dict

    def ee_at(self, t) -> np.ndarray:
        idx = np.minimum((np.asarray(t) // BIN_S).astype(int), len(self.cell_ee) - 1)
        return self.cell_ee[idx]

    def trajectory(self, rate_hz: int = 1) -> tuple[np.ndarray, np.ndarray]:
        t = np.arange(len(self.cell_ee) * BIN_S * rate_hz) / rate_hz
        return t, self.ee_at(t)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def subject_id(index: int) -> str:
    return f"S{index + 1:02d}"


def generate_protocol(seed: int, subject_index: int) -> list[Bout]:
    """Random order of the five activities, each 5-45 min, 96-163 min in total.

    Bout lengths are multiples of 30 s; durations are redrawn as a whole until
    the total lies in range, so each one stays uniform on the allowed grid.
    """
    rng = _rng(seed, subject_index, 0)
    labels = list(ActivityLabel)
    order = [labels[i] for i in rng.permutation(len(labels))]
    while True:
        cells = rng.integers(BOUT_MIN_S // BIN_S, BOUT_MAX_S // BIN_S + 1, size=len(order))
        total = int(cells.sum()) * BIN_S
        if TOTAL_MIN_S <= total <= TOTAL_MAX_S:
            break
    bouts, t = [], 0
    for label, c in zip(order, cells):
        end = t + int(c) * BIN_S
        bouts.append(Bout(float(t), float(end), label))
        t = end
    return bouts


def _genders(spec: CohortSpec) -> list[Gender]:
    n_male = round(spec.n_subjects * 0.6)
    g = [Gender.MALE] * n_male + [Gender.FEMALE] * (spec.n_subjects - n_male)
    perm = _rng(spec.seed, 2**31).permutation(spec.n_subjects)
    return [g[i] for i in perm]


def generate_profile(spec: CohortSpec, subject_index: int) -> SubjectProfile:
    rng = _rng(spec.seed, subject_index, 1)
    gender = _genders(spec)[subject_index]
    age = float(rng.integers(23, 46))
    if gender is Gender.MALE:
        height = rng.normal(179.0, 6.0)
    else:
        height = rng.normal(166.0, 6.0)
    bmi = float(np.clip(rng.normal(24.0, 2.5), 19.0, 32.0))
    weight = bmi * (height / 100.0) ** 2
    level = int(rng.integers(1, 11))
    return SubjectProfile(
        subject_id(subject_index), age, gender, round(float(height), 1), round(weight, 1), level
    )


def _ou(rng, n: int, dt: float, tau: float, sd: float) -> np.ndarray:
    """Stationary Ornstein-Uhlenbeck samples on a regular grid."""
    if sd == 0 or n == 0:
        return np.zeros(n)
    a = math.exp(-dt / tau)
    e = rng.normal(0.0, sd * math.sqrt(1 - a * a), n)
    e[0] = rng.normal(0.0, sd)
    return lfilter([1.0], [1.0, -a], e)


def _lag(x: np.ndarray, dt: float, tau: float) -> np.ndarray:
    """First-order lag starting in steady state at x[0]."""
    a = math.exp(-dt / tau)
    y, _ = lfilter([1 - a], [1.0, -a], x, zi=[a * x[0]])
    return y


def generate_recording(spec: CohortSpec, subject_index: int):
    """Synthesize one subject: ``(SensorRecording, SubjectProfile, GroundTruth)``."""
    nz = spec.noise
    sid = subject_id(subject_index)
    profile = generate_profile(spec, subject_index)
    bouts = generate_protocol(spec.seed, subject_index)
    rng = _rng(spec.seed, subject_index, 2)
    total = int(bouts[-1].end)
    n_cells = total // BIN_S

    # subject-level parameters
    hr_rest = (
        spec.hr_rest_bpm
        - nz.hr_fitness_bpm * (profile.activity_level - 5.5)
        + rng.normal(0.0, 1.0) * nz.hr_subject_sd
    )
    hr_gain = spec.hr_bpm_per_w * (1 + nz.hr_gain_sd * rng.normal())
    hf_base = spec.hf_base_w_m2 + nz.hf_subject_sd * rng.normal()
    hf_gain = spec.hf_w_m2_per_w * (1 + nz.hf_gain_sd * rng.normal())
    temp_amb = spec.temp_ambient_c + nz.temp_subject_sd * rng.normal()

    # EE on the 30 s grid
    target = np.empty(n_cells)
    cell_label = []
    for b in bouts:
        lo, hi = MET_RANGE[b.label]
        c0, c1 = int(b.start) // BIN_S, int(b.end) // BIN_S
        per_stage = STAGE_S // BIN_S
        if b.label in NOISY_HR_ACTIVITIES:
            per_stage = c1 - c0
        for s in range(c0, c1, per_stage):
            met = rng.uniform(lo, hi)
            target[s:min(s + per_stage, c1)] = met * profile.weight * W_PER_MET_KG
        cell_label += [b.label] * (c1 - c0)
    k = math.exp(-BIN_S / spec.ee_kinetics_s)
    cell_ee = np.empty(n_cells)
    prev = target[0]
    for i in range(n_cells):
        prev = target[i] + (prev - target[i]) * k
        cell_ee[i] = prev
    cell_ee = np.round(cell_ee, 3)

    def cell_of(t):
        return np.minimum((np.asarray(t) // BIN_S).astype(int), n_cells - 1)

    noisy = np.array([lab in NOISY_HR_ACTIVITIES for lab in cell_label])

    # heart rate: 1 Hz fluctuation grid, beats by stepping 60/HR
    hr_cell = hr_rest + hr_gain * cell_ee
    fluct = _ou(rng, total + 1, 1.0, nz.hr_tau_s, nz.hr_sd)
    beat_t, beat_rr = [], []
    t = float(rng.uniform(0.0, 1.0))
    while t < total:
        c = int(t // BIN_S)
        mult = nz.low_intensity_hr_multiplier if noisy[c] else 1.0
        hr = max(hr_cell[c] + mult * fluct[int(t)], 35.0)
        rr = 60000.0 / hr
        if nz.rr_jitter_sd:
            rr = max(rr + rng.normal(0.0, nz.rr_jitter_sd), 250.0)
        beat_t.append(t)
        beat_rr.append(rr)
        t += rr / 1000.0

    # heat flux and heat sink temperature at 20 Hz
    n_hf = total * HF_RATE_HZ
    hf_t = np.arange(n_hf) / HF_RATE_HZ
    dt = 1.0 / HF_RATE_HZ
    ee_hi = cell_ee[cell_of(hf_t)]
    dry = ee_hi - spec.sweat_fraction * np.maximum(ee_hi - spec.sweat_onset_w, 0.0)
    hf_clean = hf_base + hf_gain * _lag(dry, dt, spec.thermal_lag_s)
    drift = np.repeat(_ou(rng, total, 1.0, nz.hf_drift_tau_s, nz.hf_drift_sd), HF_RATE_HZ)
    hf = hf_clean + drift + rng.normal(0.0, 1.0, n_hf) * nz.hf_sd
    temp = temp_amb + spec.temp_c_per_w_m2 * _lag(hf_clean + drift, dt, spec.heatsink_lag_s)
    temp = temp + rng.normal(0.0, 1.0, n_hf) * nz.temp_sd
    hf = np.round(hf, 3)
    temp = np.round(temp, 4)

    # breath-by-breath calorimetry
    n_br = int(total / spec.breath_period_s) + 2
    gaps = spec.breath_period_s * rng.uniform(0.8, 1.2, n_br)
    br_t = rng.uniform(0.0, spec.breath_period_s) + np.concatenate([[0.0], np.cumsum(gaps[:-1])])
    br_t = br_t[br_t < total]
    br_ee = cell_ee[cell_of(br_t)] + rng.normal(0.0, 1.0, len(br_t)) * nz.ee_sd
    br_ee = np.round(br_ee, 3)

    rec = SensorRecording(
        subject_id=sid,
        hf=Stream(hf_t, hf),
        temp=Stream(hf_t, temp),
        rr=Stream(np.array(beat_t), np.array(beat_rr)),
        breaths=Stream(br_t, br_ee),
        activities=tuple(Activity(b.start, b.end, b.label) for b in bouts),
    )
    truth = GroundTruth(
        sid,
        cell_ee,
        {
            "hr_rest_bpm": hr_rest,
            "hr_bpm_per_w": hr_gain,
            "hf_base_w_m2": hf_base,
            "hf_w_m2_per_w": hf_gain,
            "temp_ambient_c": temp_amb,
        },
    )
    return rec, profile, truth


def generate_cohort(spec: CohortSpec):
    """All subjects in memory: lists of recordings, profiles and ground truths."""
    out = [generate_recording(spec, i) for i in range(spec.n_subjects)]
    recs, profiles, truths = (list(x) for x in zip(*out))
    return recs, profiles, truths


def write_ground_truth(truth: GroundTruth, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    t, ee = truth.trajectory()
    body = "\n".join(f"{a!r},{b!r}" for a, b in zip(t.tolist(), ee.tolist()))
    path.write_text(f"timestamp_s,ee_true_w\n{body}\n", encoding="utf-8", newline="\n")
    return path


def write_cohort(spec: CohortSpec, root) -> Path:
    """Write a cohort under ``root``::

        subjects/<id>/{hf,temp,rr,calorimeter,activities}.csv
        subjects.csv
        ground_truth/<id>.csv
        cohort_spec.json
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    profiles = []
    for i in range(spec.n_subjects):
        rec, profile, truth = generate_recording(spec, i)
        write_recording(rec, root / "subjects" / rec.subject_id)
        write_ground_truth(truth, root / "ground_truth" / f"{rec.subject_id}.csv")
        profiles.append(profile)
    write_profiles(profiles, root / "subjects.csv")
    (root / "cohort_spec.json").write_text(
        json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return root
