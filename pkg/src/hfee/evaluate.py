"""Leave-one-subject-out evaluation, R^2 scoring and box-plot statistics."""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConstantTruth,
    DegenerateFeature,
    HfeeError,
    RankDeficient,
    SubsetEmpty,
    TooFewRows,
    TooFewSubjects,
)
from .ingest import LOW_INTENSITY, ActivityLabel
from .regress import ModelFit, Scenario, assemble_design, fit_ols, predict
from .subjects import PcaProjector, fit_projector, project_all

log = logging.getLogger(__name__)

WHISKER_IQR = 1.5


class Subset(str, enum.Enum):
    ALL = "all"
    LOW_INTENSITY = "low_intensity"

    @property
    def labels(self) -> frozenset:
        if self is Subset.ALL:
            return frozenset(ActivityLabel)
        return LOW_INTENSITY

    @property
    def cli_name(self) -> str:
        return "all" if self is Subset.ALL else "low"

    @classmethod
    def from_cli(cls, name: str) -> "Subset":
        name = name.lower()
        if name == "all":
            return cls.ALL
        if name in ("low", "low_intensity"):
            return cls.LOW_INTENSITY
        raise ValueError(f"unknown subset {name!r}")


@dataclass(frozen=True)
class CvConfig:
    scenario: Scenario
    subset: Subset = Subset.ALL

    @property
    def tag(self) -> str:
        return f"{self.scenario.cli_name}_{self.subset.cli_name}"

    def to_dict(self) -> dict:
        return {"scenario": self.scenario.value, "subset": self.subset.value}


@dataclass(frozen=True)
class BoxStats:
    median: float
    mean: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "mean": self.mean,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }

    @classmethod
    def from_dict(cls, d) -> "BoxStats":
        return cls(**{**d, "outliers": tuple(d["outliers"])})


@dataclass(frozen=True, eq=False)
class FoldResult:
    subject_id: str
    r2: float | None
    fit: ModelFit | None = None
    projector: PcaProjector | None = None
    error: str | None = None


@dataclass(frozen=True)
class CvReport:
    config: CvConfig
    per_subject_r2: dict
    box: BoxStats | None
    failed_folds: dict = field(default_factory=dict)
    folds: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "per_subject_r2": dict(self.per_subject_r2),
            "box": self.box.to_dict() if self.box else None,
            "failed_folds": dict(self.failed_folds),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d) -> "CvReport":
        cfg = CvConfig(Scenario(d["config"]["scenario"]), Subset(d["config"]["subset"]))
        box = BoxStats.from_dict(d["box"]) if d["box"] else None
        return cls(cfg, dict(d["per_subject_r2"]), box, dict(d.get("failed_folds", {})))

    @property
    def mean_r2(self) -> float:
        return self.box.mean if self.box else float("nan")

    @property
    def median_r2(self) -> float:
        return self.box.median if self.box else float("nan")


def r_squared(y, y_hat) -> float:
    """R^2 = 1 - mean((y - y_hat)^2) / mean((y - mean(y))^2)."""
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.shape != y_hat.shape or y.ndim != 1 or len(y) == 0:
        raise ValueError("y and y_hat must be non-empty vectors of equal length")
    dev = y - y.mean()
    den = np.mean(dev * dev)
    if den == 0:
        raise ConstantTruth("ground truth is constant; R^2 undefined")
    res = y - y_hat
    return float(1.0 - np.mean(res * res) / den)


def box_stats(values) -> BoxStats:
    """Quartiles by linear interpolation, whiskers at 1.5 IQR, mean included."""
    x = np.sort(np.asarray(values, dtype=float))
    if len(x) == 0:
        raise ValueError("box_stats needs at least one value")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outliers = x[(x < lo_fence) | (x > hi_fence)]
    return BoxStats(
        median=float(med),
        mean=float(x.mean()),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(min(inside.min(), q1)),
        whisker_high=float(max(inside.max(), q3)),
        outliers=tuple(float(v) for v in outliers),
    )


def run_fold(tables, profiles, config: CvConfig, held_out: str) -> FoldResult:
    """Fit on every subject except ``held_out`` and score the held-out subject."""
    train_profiles = [p for p in profiles if p.subject_id != held_out]
    try:
        projector = fit_projector(train_profiles)
    except DegenerateFeature as exc:
        log.warning("fold %s (%s) failed: %s", held_out, config.tag, exc)
        return FoldResult(held_out, None, error=f"DegenerateFeature: {exc}")
    x_proj = project_all(projector, profiles)
    labels = config.subset.labels
    train = [t.filter(labels) for t in tables if t.subject_id != held_out]
    test = [t.filter(labels) for t in tables if t.subject_id == held_out]
    try:
        H, y = assemble_design(train, x_proj, config.scenario)
        fit = fit_ols(H, y, config.scenario)
        H_test, y_test = assemble_design(test, x_proj, config.scenario)
        r2 = r_squared(y_test, predict(fit, H_test))
    except (RankDeficient, TooFewRows, ConstantTruth) as exc:
        log.warning("fold %s (%s) failed: %s", held_out, config.tag, exc)
        return FoldResult(held_out, None, projector=projector, error=f"{type(exc).__name__}: {exc}")
    return FoldResult(held_out, r2, fit, projector)


def run_loocv(tables, profiles, config: CvConfig, n_jobs: int = 1) -> CvReport:
    """One fold per subject; the PCA projector and OLS fit see training subjects only."""
    tables = sorted(tables, key=lambda t: t.subject_id)
    by_id = {p.subject_id: p for p in profiles}
    ids = [t.subject_id for t in tables]
    if len(ids) < 3:
        raise TooFewSubjects(f"LOOCV needs at least 3 subjects, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate subject ids in feature tables")
    missing = [s for s in ids if s not in by_id]
    if missing:
        raise HfeeError(f"no profile for subjects {missing}")
    profiles = [by_id[s] for s in ids]
    for t in tables:
        if not any(r.activity in config.subset.labels for r in t.rows):
            raise SubsetEmpty(f"{t.subject_id} has no rows in subset {config.subset.value}")

    def one(sid):
        return run_fold(tables, profiles, config, sid)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            folds = list(pool.map(one, ids))
    else:
        folds = [one(s) for s in ids]

    per_subject = {f.subject_id: f.r2 for f in folds if f.r2 is not None}
    failed = {f.subject_id: f.error for f in folds if f.r2 is None}
    box = box_stats(list(per_subject.values())) if per_subject else None
    return CvReport(config, per_subject, box, failed, tuple(folds))


def write_report(report: CvReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"report_{report.config.tag}.json"
    path.write_text(report.to_json(), encoding="utf-8", newline="\n")
    return path


def read_reports(out_dir) -> list[CvReport]:
    paths = sorted(Path(out_dir).glob("report_*.json"))
    reports = [CvReport.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]
    order = {(s, b): i for i, (s, b) in enumerate((s, b) for b in Subset for s in Scenario)}
    return sorted(reports, key=lambda r: order[(r.config.scenario, r.config.subset)])


def summary_table(reports) -> str:
    lines = [f"{'scenario':<8} {'subset':<14} {'n':>3} {'median R2':>10} {'mean R2':>10} {'failed':>6}"]
    for r in reports:
        lines.append(
            f"{r.config.scenario.value:<8} {r.config.subset.value:<14} {len(r.per_subject_r2):>3} "
            f"{r.median_r2:>10.3f} {r.mean_r2:>10.3f} {len(r.failed_folds):>6}"
        )
    return "\n".join(lines)
