"""Subject background variables and their one-dimensional PCA projection."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateFeature, TooFewSubjects

SUBJECTS_HEADER = "subject_id,age_y,gender,height_cm,weight_kg,activity_level"
FEATURE_NAMES = ("age", "gender", "height", "weight", "activity_level")
WEIGHT_INDEX = FEATURE_NAMES.index("weight")


class Gender(str, enum.Enum):
    MALE = "M"
    FEMALE = "F"


@dataclass(frozen=True)
class SubjectProfile:
    subject_id: str
    age: float
    gender: Gender
    height: float
    weight: float
    activity_level: int

    def __post_init__(self):
        object.__setattr__(self, "gender", Gender(self.gender))
        if not (self.age > 0 and self.height > 0 and self.weight > 0):
            raise ValueError(f"{self.subject_id}: age, height and weight must be positive")
        if int(self.activity_level) != self.activity_level or not 1 <= self.activity_level <= 10:
            raise ValueError(f"{self.subject_id}: activity level must be an integer in 1..10")

    def vector(self) -> np.ndarray:
        g = 0.0 if self.gender is Gender.MALE else 1.0
        return np.array([self.age, g, self.height, self.weight, float(self.activity_level)])


@dataclass(frozen=True, eq=False)
class PcaProjector:
    means: np.ndarray
    scales: np.ndarray
    loading: np.ndarray
    eigenvalue: float

    def to_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "scales": self.scales.tolist(),
            "loading": self.loading.tolist(),
            "eigenvalue": self.eigenvalue,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __eq__(self, other):
        if not isinstance(other, PcaProjector):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def _sign_fix(v: np.ndarray) -> np.ndarray:
    # weight coordinate >= 0; if it is exactly zero, the first nonzero coordinate
    pivot = v[WEIGHT_INDEX]
    if pivot == 0.0:
        nz = np.flatnonzero(v)
        pivot = v[nz[0]] if len(nz) else 1.0
    return -v if pivot < 0 else v


def fit_projector(profiles, *, drop_degenerate: bool = False) -> PcaProjector:
    """Fit the leading principal axis of the z-scored background variables.

    Profiles are sorted by subject id first, so the result does not depend on
    input order. A feature with zero variance raises DegenerateFeature unless
    ``drop_degenerate`` is set, in which case it is given unit scale and
    contributes nothing to the covariance.
    """
    profiles = sorted(profiles, key=lambda p: p.subject_id)
    if len(profiles) < 2:
        raise TooFewSubjects(f"PCA needs at least 2 subjects, got {len(profiles)}")
    X = np.stack([p.vector() for p in profiles])
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    flat = scales == 0
    if flat.any():
        if not drop_degenerate:
            names = [n for n, f in zip(FEATURE_NAMES, flat) if f]
            raise DegenerateFeature(f"zero variance in {', '.join(names)}")
        scales = np.where(flat, 1.0, scales)
    Z = (X - means) / scales
    cov = Z.T @ Z / (len(Z) - 1)
    w, V = np.linalg.eigh(cov)
    loading = V[:, -1]
    loading = _sign_fix(loading / np.linalg.norm(loading))
    for a in (means, scales, loading):
        a.setflags(write=False)
    return PcaProjector(means, scales, loading, float(w[-1]))


def project(projector: PcaProjector, profile: SubjectProfile) -> float:
    z = (profile.vector() - projector.means) / projector.scales
    return float(projector.loading @ z)


def project_all(projector: PcaProjector, profiles) -> dict[str, float]:
    return {p.subject_id: project(projector, p) for p in profiles}


def read_profiles(path) -> list[SubjectProfile]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != SUBJECTS_HEADER:
        raise ValueError(f"{path}: expected header {SUBJECTS_HEADER!r}")
    out = []
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}:{i}: expected 6 columns")
        sid, age, g, h, w, lvl = parts
        out.append(SubjectProfile(sid, float(age), Gender(g), float(h), float(w), int(lvl)))
    return out


def write_profiles(profiles, path) -> Path:
    path = Path(path)
    lines = [SUBJECTS_HEADER]
    for p in profiles:
        lines.append(
            f"{p.subject_id},{p.age!r},{p.gender.value},{p.height!r},{p.weight!r},{p.activity_level}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path
