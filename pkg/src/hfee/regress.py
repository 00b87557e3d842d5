"""Ordinary least squares over the predictor scenarios."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import MissingProjection, RankDeficient, SchemaMismatch, TooFewRows

RANK_RTOL = 1e-10

HEAT_COLUMNS = ("hf", "hf_med_short", "hf_med_long", "temp", "temp_med_short", "temp_med_long")


class Scenario(str, enum.Enum):
    HR = "HR"
    HR_HF = "HR_HF"
    HF = "HF"

    @property
    def column_schema(self) -> tuple[str, ...]:
        if self is Scenario.HR:
            cols = ("hr",)
        elif self is Scenario.HR_HF:
            cols = ("hr",) + HEAT_COLUMNS
        else:
            cols = HEAT_COLUMNS
        return ("intercept",) + cols + ("x_proj",)

    @property
    def cli_name(self) -> str:
        return {"HR": "hr", "HR_HF": "hrhf", "HF": "hf"}[self.value]

    @classmethod
    def from_cli(cls, name: str) -> "Scenario":
        for s in cls:
            if name.lower() in (s.cli_name, s.value.lower()):
                return s
        raise ValueError(f"unknown scenario {name!r}")


@dataclass(frozen=True, eq=False)
class ModelFit:
    scenario: Scenario | None
    theta: np.ndarray
    n_rows: int
    residual_mean: float

    @property
    def schema(self) -> tuple[str, ...] | None:
        return self.scenario.column_schema if self.scenario else None

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.value if self.scenario else None,
            "schema": list(self.schema) if self.schema else None,
            "theta": self.theta.tolist(),
            "n_rows": self.n_rows,
            "residual_mean": self.residual_mean,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ModelFit":
        d = json.loads(text)
        sc = Scenario(d["scenario"]) if d["scenario"] else None
        if sc and list(sc.column_schema) != d["schema"]:
            raise SchemaMismatch(f"stored schema {d['schema']} does not match {sc.value}")
        return cls(sc, np.array(d["theta"], dtype=float), d["n_rows"], d["residual_mean"])


def assemble_design(tables, x_proj_by_subject, scenario: Scenario):
    """Stack the scenario's columns of every table into ``(H, y)``.

    The first column of H is ones. Rows keep table order, then row order.
    """
    schema = scenario.column_schema
    H_parts, y_parts = [], []
    for table in tables:
        try:
            xp = x_proj_by_subject[table.subject_id]
        except KeyError:
            raise MissingProjection(f"no x_proj for subject {table.subject_id!r}") from None
        n = len(table)
        cols = []
        for name in schema:
            if name == "intercept":
                cols.append(np.ones(n))
            elif name == "x_proj":
                cols.append(np.full(n, float(xp)))
            else:
                cols.append(table.column(name))
        H_parts.append(np.column_stack(cols) if n else np.empty((0, len(schema))))
        y_parts.append(table.column("ee_true"))
    if not H_parts:
        return np.empty((0, len(schema))), np.empty(0)
    return np.vstack(H_parts), np.concatenate(y_parts)


def fit_ols(H, y, scenario: Scenario | None = None) -> ModelFit:
    """Least squares estimate via Householder QR.

    Raises TooFewRows when n < p and RankDeficient when the smallest singular
    value of H is below 1e-10 times the largest.
    """
    H = np.asarray(H, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = H.shape
    if y.shape != (n,):
        raise SchemaMismatch(f"y has shape {y.shape}, expected ({n},)")
    if scenario is not None and p != len(scenario.column_schema):
        raise SchemaMismatch(f"H has {p} columns, {scenario.value} needs {len(scenario.column_schema)}")
    if n < p:
        raise TooFewRows(f"{n} rows for {p} parameters")
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[0] == 0 or sv[-1] < RANK_RTOL * sv[0]:
        rank = int(np.count_nonzero(sv >= RANK_RTOL * sv[0]))
        raise RankDeficient(f"effective rank {rank} < {p}")
    Q, R = np.linalg.qr(H, mode="reduced")
    theta = solve_triangular(R, Q.T @ y, lower=False)
    resid = y - H @ theta
    theta.setflags(write=False)
    return ModelFit(scenario, theta, n, float(resid.mean()))


def predict(fit: ModelFit, H) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[1] != len(fit.theta):
        raise SchemaMismatch(f"H has shape {H.shape}, model expects {len(fit.theta)} columns")
    return H @ fit.theta
