"""Dataset ingestion, standardization and noise injection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from multiquant.core.lloyd import FitOptions, fit_multistart
from multiquant.core.model import DistortionSpec, MultiDataset, Partition
from multiquant.core.quantizer import assign
from multiquant.utils.constants import GROUND_TRUTH_RESTARTS
from multiquant.utils.debug import debug_experiment, debug_io
from multiquant.utils.exceptions import (
    EmptyDataset,
    InvalidParameter,
    ParseError,
    RaggedRows,
    ZeroVariance,
)

Column = Union[int, str]


def _is_numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path: Path, columns: Optional[Sequence[Column]] = None) -> np.ndarray:
    """Read a comma-separated table of feature vectors, shape (m, d).

    A first row containing any non-numeric cell is taken as a header.
    ``columns`` selects feature columns by index or header name; the
    remaining columns (labels, ids) are ignored and may hold text.

    Raises:
        ParseError: Unreadable file, unknown column, or a non-numeric feature.
        RaggedRows: Rows with differing numbers of columns.
        EmptyDataset: No data rows.
    """
    path = Path(path)
    try:
        with open(path, newline="") as f:
            rows = [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if not rows:
        raise EmptyDataset(f"{path} contains no rows")

    header: Optional[list[str]] = None
    if not all(_is_numeric(cell) for cell in rows[0]):
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")

    width = len(header) if header is not None else len(rows[0])
    for lineno, row in enumerate(rows, start=2 if header else 1):
        if len(row) != width:
            raise RaggedRows(f"{path}: line {lineno} has {len(row)} columns, expected {width}")

    if columns is None:
        indices = list(range(width))
    else:
        indices = []
        for col in columns:
            if isinstance(col, str) and not col.lstrip("-").isdigit():
                if header is None or col not in header:
                    raise ParseError(f"{path}: no column named {col!r}")
                indices.append(header.index(col))
            else:
                index = int(col)
                if not -width <= index < width:
                    raise ParseError(f"{path}: column {index} out of range for width {width}")
                indices.append(index % width)

    data = np.empty((len(rows), len(indices)))
    for i, row in enumerate(rows):
        for j, index in enumerate(indices):
            try:
                data[i, j] = float(row[index])
            except ValueError as e:
                raise ParseError(f"{path}: non-numeric value {row[index]!r} in column {index}") from e
    debug_io("loaded dataset", path=str(path), m=data.shape[0], d=data.shape[1])
    return data


def standardize(points: np.ndarray) -> np.ndarray:
    """Divide every coordinate by its sample standard deviation (ddof = 1).

    The mean is not shifted.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise InvalidParameter("standardization needs at least two samples")
    std = points.std(axis=0, ddof=1)
    zero = np.flatnonzero(std == 0)
    if zero.size:
        raise ZeroVariance(f"columns {zero.tolist()} have zero variance")
    return points / std


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class NoiseSpec:
    """Independent additive noise on each of L observations.

    ``parameter`` is the variance for Gaussian noise and the half-width for
    uniform noise on [-eta, eta].
    """

    kind: NoiseKind
    parameter: float
    L: int
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not np.isfinite(self.parameter) or self.parameter <= 0:
            raise InvalidParameter(f"noise parameter must be positive, got {self.parameter}")
        if self.L < 1:
            raise InvalidParameter(f"L must be >= 1, got {self.L}")


def inject_noise(
    clean: np.ndarray,
    spec: NoiseSpec,
    rng: Optional[np.random.Generator] = None,
) -> MultiDataset:
    """Observation l of sample i is clean_i plus an independent noise draw."""
    clean = np.asarray(clean, dtype=float)
    if clean.ndim != 2 or clean.shape[0] == 0:
        raise EmptyDataset("clean dataset must be a nonempty (m, d) array")
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    shape = (clean.shape[0], spec.L, clean.shape[1])
    if spec.kind is NoiseKind.GAUSSIAN:
        noise = rng.normal(0.0, np.sqrt(spec.parameter), size=shape)
    else:
        noise = rng.uniform(-spec.parameter, spec.parameter, size=shape)
    return MultiDataset(clean[:, None, :] + noise)


def ground_truth_partition(
    clean: np.ndarray,
    n: int,
    seed: int,
    restarts: int = GROUND_TRUTH_RESTARTS,
    threads: int = 1,
) -> Partition:
    """Best-of-restarts squared-error clustering of the clean data."""
    clean = np.asarray(clean, dtype=float)
    ds = MultiDataset(clean[:, None, :])
    spec = DistortionSpec.equal(1, 2.0)
    opts = FitOptions(n=n, restarts=restarts, seed=seed, threads=threads)
    codebook, history = fit_multistart(ds, spec, opts)
    debug_experiment("ground truth", n=n, distortion=history.final_distortion)
    return Partition(assign(codebook, ds, spec).labels, n)
