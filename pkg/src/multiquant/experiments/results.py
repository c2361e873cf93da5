"""Experiment result types and their CSV/JSON writers.

Noisy-clustering results are written in long format, one row per
(method, n, metric) with columns ``method, n, metric, mean, ci_half``.
High-resolution comparisons get a summary table and a centers table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from multiquant.utils.constants import Schema
from multiquant.utils.debug import debug_io
from multiquant.utils.formatting import atomic_write_text, dumps_json, render_csv

RESULT_COLUMNS = ("method", "n", "metric", "mean", "ci_half")
METRICS = ("ari", "ami", "distortion")

HIGHRES_COLUMNS = (
    "lambda",
    "n",
    "alpha",
    "empirical_distortion",
    "analytical_distortion",
    "predicted_distortion",
    "distortion_gap",
    "prediction_gap",
    "max_center_gap",
    "interior_center_gap",
)
CENTER_COLUMNS = ("lambda", "n", "index", "numerical", "analytical", "gap")


@dataclass(frozen=True)
class ResultRow:
    method: str
    n: int
    metric: str
    mean: float
    ci_half: float

    def as_tuple(self) -> tuple[Any, ...]:
        return (self.method, self.n, self.metric, self.mean, self.ci_half)


@dataclass(frozen=True)
class ExperimentResult:
    """Monte Carlo means and 95% half-widths per (method, n, metric)."""

    rows: tuple[ResultRow, ...]
    trials: int
    seed: int
    metadata: dict[str, Any] = field(default_factory=dict)

    def get(self, method: str, n: int, metric: str) -> ResultRow:
        for row in self.rows:
            if row.method == method and row.n == n and row.metric == metric:
                return row
        raise KeyError((method, n, metric))

    def mean(self, method: str, n: int, metric: str) -> float:
        return self.get(method, n, metric).mean

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": Schema.RESULT,
            "kind": "noisy",
            "trials": self.trials,
            "seed": self.seed,
            "metadata": self.metadata,
            "rows": [
                {"method": r.method, "n": r.n, "metric": r.metric, "mean": r.mean, "ci_half": r.ci_half}
                for r in self.rows
            ],
        }


def summarize(values: np.ndarray, z: float) -> tuple[float, float]:
    """Mean and normal-approximation half-width z * s / sqrt(k)."""
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(z * np.std(values, ddof=1) / np.sqrt(values.size))


@dataclass(frozen=True)
class HighresRow:
    """One (lambda, n) comparison of fitted and analytical quantizers."""

    lambda2: float
    n: int
    alpha: float
    numerical_centers: np.ndarray
    analytical_centers: np.ndarray
    empirical_distortion: float
    analytical_distortion: float
    predicted_distortion: float
    # Lloyd distortion trace of the winning restart
    fit_distortions: tuple[float, ...] = ()

    @property
    def center_gaps(self) -> np.ndarray:
        return np.abs(self.numerical_centers - self.analytical_centers)

    @property
    def max_center_gap(self) -> float:
        return float(np.max(self.center_gaps))

    @property
    def interior_center_gap(self) -> float:
        """Largest gap excluding the outermost center on each side."""
        gaps = self.center_gaps
        if gaps.size <= 2:
            return 0.0
        return float(np.max(gaps[1:-1]))

    @property
    def distortion_gap(self) -> float:
        """Relative gap of the analytical codebook's distortion to the fitted one."""
        return abs(self.analytical_distortion - self.empirical_distortion) / self.empirical_distortion

    @property
    def prediction_gap(self) -> float:
        return abs(self.predicted_distortion - self.empirical_distortion) / self.empirical_distortion

    def summary(self) -> tuple[Any, ...]:
        return (
            self.lambda2,
            self.n,
            self.alpha,
            self.empirical_distortion,
            self.analytical_distortion,
            self.predicted_distortion,
            self.distortion_gap,
            self.prediction_gap,
            self.max_center_gap,
            self.interior_center_gap,
        )


@dataclass(frozen=True)
class HighresResult:
    rows: tuple[HighresRow, ...]
    r: float
    m: int
    seed: int

    def get(self, lambda2: float, n: int) -> HighresRow:
        for row in self.rows:
            if row.lambda2 == lambda2 and row.n == n:
                return row
        raise KeyError((lambda2, n))

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": Schema.RESULT,
            "kind": "highres",
            "r": self.r,
            "m": self.m,
            "seed": self.seed,
            "rows": [
                {
                    **dict(zip(HIGHRES_COLUMNS, row.summary())),
                    "numerical_centers": row.numerical_centers,
                    "analytical_centers": row.analytical_centers,
                    "fit_distortions": list(row.fit_distortions),
                }
                for row in self.rows
            ],
        }


def write_result_csv(result: ExperimentResult, path: Path) -> None:
    atomic_write_text(path, render_csv(RESULT_COLUMNS, (row.as_tuple() for row in result.rows)))
    debug_io("wrote result table", path=str(path), rows=len(result.rows))


def write_result_json(result: ExperimentResult, path: Path) -> None:
    atomic_write_text(path, dumps_json(result.to_dict()))
    debug_io("wrote result summary", path=str(path))


def write_highres_csv(result: HighresResult, path: Path, centers_path: Optional[Path] = None) -> None:
    """Summary table at ``path``; per-center table at ``centers_path`` when given."""
    atomic_write_text(path, render_csv(HIGHRES_COLUMNS, (row.summary() for row in result.rows)))
    if centers_path is not None:
        center_rows = []
        for row in result.rows:
            for i, (num, ana) in enumerate(zip(row.numerical_centers, row.analytical_centers)):
                center_rows.append((row.lambda2, row.n, i, num, ana, abs(num - ana)))
        atomic_write_text(centers_path, render_csv(CENTER_COLUMNS, center_rows))
    debug_io("wrote highres table", path=str(path), rows=len(result.rows))


def write_highres_json(result: HighresResult, path: Path) -> None:
    atomic_write_text(path, dumps_json(result.to_dict()))
    debug_io("wrote highres summary", path=str(path))
