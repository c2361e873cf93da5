"""Core domain types shared by all modules.

All types are immutable after construction: arrays are copied on the way in
and marked read-only, so instances can be shared across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Sequence

import numpy as np

from multiquant.utils.exceptions import (
    DimensionMismatch,
    EmptyDataset,
    InvalidParameter,
    InvalidPower,
    NonFinite,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    """Mark an array read-only and return it."""
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MultiSample:
    """One sample: L observation vectors of dimension d, in observation order."""

    observations: np.ndarray

    @property
    def L(self) -> int:
        return int(self.observations.shape[0])

    @property
    def d(self) -> int:
        return int(self.observations.shape[1])


@dataclass(frozen=True, eq=False)
class MultiDataset:
    """m samples, each an L-tuple of d-dimensional observations.

    Stored as a read-only float64 array of shape (m, L, d). Build instances
    through :func:`validate_multidataset` or :meth:`from_concat`.
    """

    observations: np.ndarray

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations, dtype=float)
        if obs.flags.writeable:
            obs = _frozen(obs.copy())
        object.__setattr__(self, "observations", obs)
        if obs.ndim != 3:
            raise DimensionMismatch(f"expected an (m, L, d) array, got shape {obs.shape}")
        if obs.shape[0] == 0:
            raise EmptyDataset("dataset has no samples")
        if obs.shape[1] == 0 or obs.shape[2] == 0:
            raise DimensionMismatch(f"L and d must be positive, got shape {obs.shape}")
        if not np.all(np.isfinite(obs)):
            raise NonFinite("dataset contains NaN or infinite coordinates")

    @property
    def m(self) -> int:
        return int(self.observations.shape[0])

    @property
    def L(self) -> int:
        return int(self.observations.shape[1])

    @property
    def d(self) -> int:
        return int(self.observations.shape[2])

    @property
    def samples(self) -> list[MultiSample]:
        return [MultiSample(_frozen(row.copy())) for row in self.observations]

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, index: int) -> MultiSample:
        return MultiSample(_frozen(self.observations[index].copy()))

    def __iter__(self) -> Iterator[MultiSample]:
        return iter(self.samples)

    def subset(self, indices: np.ndarray) -> MultiDataset:
        """Dataset restricted to the given sample indices (in that order)."""
        return MultiDataset(self.observations[indices])

    def to_rows(self) -> list[list[list[float]]]:
        """Serialize to nested lists of floats (sample, observation, coordinate)."""
        return self.observations.tolist()

    @classmethod
    def from_array(cls, array: Any) -> MultiDataset:
        """Build from an (m, L, d) array-like, copying the data."""
        return cls(np.array(array, dtype=float))

    @classmethod
    def from_concat(cls, rows: Any, L: int) -> MultiDataset:
        """Split m rows of width L*d into L observations of d coordinates."""
        flat = np.array(rows, dtype=float)
        if flat.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D table, got shape {flat.shape}")
        if L < 1 or flat.shape[1] % L != 0:
            raise DimensionMismatch(
                f"row width {flat.shape[1]} is not divisible by L={L}"
            )
        return cls(flat.reshape(flat.shape[0], L, flat.shape[1] // L))


def validate_multidataset(raw: Sequence[Any]) -> MultiDataset:
    """Validate raw samples (each an L x d numeric matrix) into a MultiDataset.

    Raises:
        EmptyDataset: raw has no samples.
        DimensionMismatch: a sample's shape differs from the first sample's.
        NonFinite: a coordinate is NaN or infinite.
    """
    if raw is None or len(raw) == 0:
        raise EmptyDataset("dataset has no samples")

    matrices = []
    expected: Optional[tuple[int, ...]] = None
    for i, sample in enumerate(raw):
        try:
            matrix = np.array(sample, dtype=float)
        except (TypeError, ValueError) as exc:
            raise DimensionMismatch(f"sample {i} is not a rectangular numeric matrix") from exc
        if matrix.ndim != 2:
            raise DimensionMismatch(
                f"sample {i} must be an L x d matrix, got shape {matrix.shape}"
            )
        if expected is None:
            expected = matrix.shape
        elif matrix.shape != expected:
            raise DimensionMismatch(
                f"sample {i} has shape {matrix.shape}, expected {expected}"
            )
        if not np.all(np.isfinite(matrix)):
            raise NonFinite(f"sample {i} contains NaN or infinite coordinates")
        matrices.append(matrix)

    return MultiDataset(np.stack(matrices))


def concat_view(ds: MultiDataset) -> np.ndarray:
    """Rows [y_1 ... y_L] flattened in observation order, shape (m, L*d).

    Coordinate j of observation l lands at flat index l*d + j.
    """
    return _frozen(ds.observations.reshape(ds.m, ds.L * ds.d).copy())


@dataclass(frozen=True)
class DistortionSpec:
    """Weighted r-th power distortion: sum_l lambda_l * ||u - y_l||^r."""

    r: float
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not np.isfinite(self.r) or self.r < 1:
            raise InvalidPower(f"power r must be >= 1, got {self.r}")
        weights = tuple(float(w) for w in self.weights)
        if not weights:
            raise InvalidParameter("at least one weight is required")
        if any(not np.isfinite(w) or w <= 0 for w in weights):
            raise InvalidParameter(f"weights must be positive, got {weights}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "weights", weights)

    @classmethod
    def equal(cls, L: int, r: float = 2.0) -> DistortionSpec:
        """Unit weights for L observations."""
        return cls(r=r, weights=(1.0,) * L)

    @property
    def L(self) -> int:
        return len(self.weights)

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def c1(self) -> float:
        return float(sum(self.weights))

    @property
    def alpha(self) -> Optional[float]:
        """(lambda_2 / lambda_1)^(1/(r-1)); defined for L = 2 and r > 1."""
        if self.L != 2 or self.r <= 1:
            return None
        return float((self.weights[1] / self.weights[0]) ** (1.0 / (self.r - 1.0)))

    def scaled(self, factor: float) -> DistortionSpec:
        """All weights multiplied by factor."""
        return DistortionSpec(r=self.r, weights=tuple(w * factor for w in self.weights))

    def normalized(self) -> tuple[DistortionSpec, float]:
        """Weights divided by lambda_1, plus the removed scale lambda_1."""
        scale = self.weights[0]
        return self.scaled(1.0 / scale), scale

    def check_dataset(self, ds: MultiDataset) -> None:
        if ds.L != self.L:
            raise DimensionMismatch(
                f"dataset has L={ds.L} observations per sample but {self.L} weights were given"
            )


@dataclass(frozen=True)
class FitInfo:
    """Metadata of the fit that produced a codebook."""

    distortion: float
    iterations: int
    seed: Optional[int] = None
    restart: Optional[int] = None


@dataclass(frozen=True, eq=False)
class Codebook:
    """n centers u_1..u_n in d dimensions."""

    centers: np.ndarray
    fit_info: Optional[FitInfo] = field(default=None)

    def __post_init__(self) -> None:
        centers = np.array(self.centers, dtype=float)
        if centers.ndim == 1:
            centers = centers.reshape(-1, 1)
        if centers.ndim != 2 or centers.shape[0] < 1 or centers.shape[1] < 1:
            raise DimensionMismatch(f"codebook needs an (n, d) array, got shape {centers.shape}")
        if not np.all(np.isfinite(centers)):
            raise NonFinite("codebook contains NaN or infinite coordinates")
        if self.fit_info is not None and self.fit_info.distortion < 0:
            raise InvalidParameter("fit distortion must be nonnegative")
        object.__setattr__(self, "centers", _frozen(centers))

    @property
    def n(self) -> int:
        return int(self.centers.shape[0])

    @property
    def d(self) -> int:
        return int(self.centers.shape[1])

    def sorted(self) -> Codebook:
        """Centers in lexicographic order (useful for d = 1 comparisons)."""
        order = np.lexsort(self.centers.T[::-1])
        return Codebook(self.centers[order], self.fit_info)


@dataclass(frozen=True, eq=False)
class Partition:
    """Cluster labels of m samples, each in [0, n)."""

    labels: np.ndarray
    n: Optional[int] = None

    def __post_init__(self) -> None:
        labels = np.array(self.labels)
        if labels.ndim != 1:
            raise DimensionMismatch(f"labels must be 1-D, got shape {labels.shape}")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise InvalidParameter("labels must be integers")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            raise InvalidParameter("labels must be nonnegative")
        n = self.n
        if n is None:
            n = int(labels.max()) + 1 if labels.size else 0
        elif labels.size and labels.max() >= n:
            raise InvalidParameter(f"label {int(labels.max())} is not below n={n}")
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "n", int(n))

    @property
    def m(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_clusters(self) -> int:
        """Number of distinct labels actually used."""
        return int(np.unique(self.labels).size)

    def relabeled(self) -> Partition:
        """Canonical labels numbered by first appearance."""
        _, first, inverse = np.unique(self.labels, return_index=True, return_inverse=True)
        rank = np.argsort(np.argsort(first))
        return Partition(rank[inverse])
