"""Source density models for the high-resolution formulas.

Two kinds are supported: independent sources uniform on axis-aligned boxes,
and joint densities tabulated on a rectangular grid and interpolated
multilinearly. Coordinates of a joint point are flattened observation-major,
the same layout as ``concat_view``: coordinate j of source l sits at l*d + j.
"""

from __future__ import annotations

import csv
import functools
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from multiquant.core.highres.quadrature import integrate_1d
from multiquant.core.model import DistortionSpec
from multiquant.utils.constants import DEFAULT_GRID_SIZE, QUAD_ABS_TOL
from multiquant.utils.debug import debug_io, debug_quad
from multiquant.utils.exceptions import (
    DimensionMismatch,
    InvalidParameter,
    NonFinite,
    ParseError,
    RaggedRows,
)


class DensityKind(str, Enum):
    UNIFORM = "uniform"
    GRID = "grid"


def _grid_mass(axes: Sequence[np.ndarray], values: np.ndarray) -> float:
    """Exact integral of the multilinear interpolant of values over the grid."""
    mass = values
    for axis in reversed(range(len(axes))):
        mass = trapezoid(mass, axes[axis], axis=axis)
    return float(mass)


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Joint density of L sources in d dimensions.

    For the uniform kind the sources are independent and source l is
    uniform on the box [lows[l], highs[l]]. For the grid kind ``values``
    holds the density at the nodes of ``axes`` (one axis per flattened
    coordinate) and is zero outside the grid. A grid built from independent
    coordinates also keeps its one-dimensional ``factors``.
    """

    kind: DensityKind
    L: int
    d: int
    lows: np.ndarray
    highs: np.ndarray
    axes: tuple[np.ndarray, ...] = ()
    values: Optional[np.ndarray] = None
    factors: tuple[DensityModel, ...] = ()
    _interp: Any = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        lows = np.array(self.lows, dtype=float).reshape(self.L, self.d)
        highs = np.array(self.highs, dtype=float).reshape(self.L, self.d)
        if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
            raise NonFinite("density support bounds must be finite")
        if np.any(highs <= lows):
            raise InvalidParameter("density support must have positive width in every coordinate")
        lows.setflags(write=False)
        highs.setflags(write=False)
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)
        if self.kind is DensityKind.GRID:
            if self.values is None or len(self.axes) != self.dim:
                raise DimensionMismatch(f"grid density needs {self.dim} axes")
            interp = RegularGridInterpolator(
                self.axes, self.values, method="linear", bounds_error=False, fill_value=0.0
            )
            object.__setattr__(self, "_interp", interp)

    @property
    def dim(self) -> int:
        """Number of flattened coordinates, L * d."""
        return self.L * self.d

    @property
    def support(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lows, self.highs

    @property
    def volume(self) -> float:
        return float(np.prod(self.highs - self.lows))

    def breakpoints(self, source: int, coord: int) -> np.ndarray:
        """Points where the density may have a kink along one coordinate."""
        if self.kind is DensityKind.GRID:
            return self.axes[source * self.d + coord]
        return np.array([self.lows[source, coord], self.highs[source, coord]])

    def pdf(self, points: Any) -> np.ndarray:
        """Density at points of shape (..., L*d); scalars allowed when L*d = 1."""
        pts = np.asarray(points, dtype=float)
        if self.dim == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        if pts.shape[-1] != self.dim:
            raise DimensionMismatch(f"points have {pts.shape[-1]} coordinates, expected {self.dim}")
        if self.kind is DensityKind.GRID:
            flat = pts.reshape(-1, self.dim)
            return np.maximum(self._interp(flat), 0.0).reshape(pts.shape[:-1])
        lo = self.lows.reshape(-1)
        hi = self.highs.reshape(-1)
        inside = np.all((pts >= lo) & (pts <= hi), axis=-1)
        return np.where(inside, 1.0 / self.volume, 0.0)

    def mass(self) -> float:
        if self.kind is DensityKind.UNIFORM:
            return 1.0
        return _grid_mass(self.axes, self.values)

    def marginal(self, source: int) -> DensityModel:
        """Density of one source (L = 1)."""
        if not 0 <= source < self.L:
            raise InvalidParameter(f"source index {source} outside [0, {self.L})")
        if self.L == 1:
            return self
        if self.kind is DensityKind.UNIFORM:
            return DensityModel.uniform(self.lows[source], self.highs[source])
        keep = range(source * self.d, (source + 1) * self.d)
        values = self.values
        for axis in reversed(range(self.dim)):
            if axis not in keep:
                values = trapezoid(values, self.axes[axis], axis=axis)
        return DensityModel.from_grid([self.axes[a] for a in keep], values, L=1)

    @classmethod
    def uniform(cls, lows: Any, highs: Any) -> DensityModel:
        """Independent sources, source l uniform on [lows[l], highs[l]].

        ``lows`` and ``highs`` are (L, d) arrays; a 1-D array is read as a
        single source.
        """
        lows = np.atleast_2d(np.asarray(lows, dtype=float))
        highs = np.atleast_2d(np.asarray(highs, dtype=float))
        if lows.shape != highs.shape:
            raise DimensionMismatch(f"bounds have shapes {lows.shape} and {highs.shape}")
        L, d = lows.shape
        return cls(DensityKind.UNIFORM, L, d, lows, highs)

    @classmethod
    def unit_uniform(cls, L: int = 1, d: int = 1) -> DensityModel:
        """L independent sources, each uniform on [0, 1]^d."""
        return cls.uniform(np.zeros((L, d)), np.ones((L, d)))

    @classmethod
    def from_grid(cls, axes: Sequence[Any], values: Any, L: int = 1) -> DensityModel:
        """Tabulated joint density, renormalized to unit mass."""
        axes_t = tuple(np.array(a, dtype=float) for a in axes)
        if not axes_t or len(axes_t) % L != 0:
            raise DimensionMismatch(f"{len(axes_t)} axes cannot be split into L={L} sources")
        d = len(axes_t) // L
        for axis in axes_t:
            if axis.ndim != 1 or axis.size < 2 or np.any(np.diff(axis) <= 0):
                raise InvalidParameter("grid axes must be strictly increasing with at least 2 nodes")
            axis.setflags(write=False)
        vals = np.array(values, dtype=float)
        expected = tuple(a.size for a in axes_t)
        if vals.shape != expected:
            raise DimensionMismatch(f"grid values have shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise NonFinite("grid density contains NaN or infinite values")
        if np.any(vals < 0):
            raise InvalidParameter("grid density values must be nonnegative")
        mass = _grid_mass(axes_t, vals)
        if not mass > 0:
            raise InvalidParameter("grid density has zero mass")
        vals = vals / mass
        vals.setflags(write=False)
        lows = np.array([a[0] for a in axes_t]).reshape(L, d)
        highs = np.array([a[-1] for a in axes_t]).reshape(L, d)
        return cls(DensityKind.GRID, L, d, lows, highs, axes_t, vals)

    @classmethod
    def from_factors(cls, factors: Sequence[DensityModel]) -> DensityModel:
        """Single-source grid density with independent coordinates."""
        if any(f.kind is not DensityKind.GRID or f.dim != 1 for f in factors):
            raise InvalidParameter("factors must be one-dimensional grid densities")
        if len(factors) == 1:
            return factors[0]
        axes = tuple(f.axes[0] for f in factors)
        values = functools.reduce(np.multiply.outer, [f.values for f in factors])
        values.setflags(write=False)
        lows = np.array([a[0] for a in axes]).reshape(1, -1)
        highs = np.array([a[-1] for a in axes]).reshape(1, -1)
        return cls(DensityKind.GRID, 1, len(axes), lows, highs, axes, values, tuple(factors))


def load_density_csv(path: Path, L: int = 1) -> DensityModel:
    """Read a tabulated density from CSV.

    Each row holds the coordinates of one grid node followed by the density
    value, so a 1-D density is a two-column (coordinate, value) table. The
    rows must cover a full rectangular grid, in any order. A non-numeric
    first row is treated as a header.
    """
    path = Path(path)
    try:
        with open(path, newline="") as f:
            rows = [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if not rows:
        raise ParseError(f"{path} contains no rows")

    def parse(row: list[str]) -> Optional[list[float]]:
        try:
            return [float(cell) for cell in row]
        except ValueError:
            return None

    if parse(rows[0]) is None:
        rows = rows[1:]
    width = len(rows[0]) if rows else 0
    if width < 2:
        raise ParseError(f"{path} needs at least one coordinate column and a value column")
    table = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise RaggedRows(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        parsed = parse(row)
        if parsed is None:
            raise ParseError(f"{path}: row {lineno} is not numeric")
        table.append(parsed)

    data = np.array(table)
    coords, density = data[:, :-1], data[:, -1]
    axes = [np.unique(coords[:, k]) for k in range(coords.shape[1])]
    shape = tuple(a.size for a in axes)
    if math.prod(shape) != data.shape[0]:
        raise ParseError(f"{path}: {data.shape[0]} rows do not form a full {shape} grid")
    values = np.full(shape, np.nan)
    index = tuple(np.searchsorted(axes[k], coords[:, k]) for k in range(len(axes)))
    values[index] = density
    if np.any(np.isnan(values)):
        raise ParseError(f"{path}: duplicate grid nodes")
    debug_io("loaded density", path=str(path), shape=shape)
    return DensityModel.from_grid(axes, values, L=L)


def uniform_sum_pdf(t: np.ndarray, widths: Sequence[float]) -> np.ndarray:
    """Density of U_1 + ... + U_L with U_l uniform on [0, widths[l]]."""
    L = len(widths)
    total = np.zeros_like(t)
    for subset in itertools.product((0, 1), repeat=L):
        shift = sum(w for w, s in zip(widths, subset) if s)
        sign = -1.0 if sum(subset) % 2 else 1.0
        total += sign * np.maximum(t - shift, 0.0) ** (L - 1)
    pdf = total / (math.factorial(L - 1) * math.prod(widths))
    inside = (t >= 0) & (t <= sum(widths))
    return np.where(inside, np.maximum(pdf, 0.0), 0.0)


def _subset_sums(widths: Sequence[float]) -> np.ndarray:
    return np.array(
        [sum(w for w, s in zip(widths, subset) if s) for subset in itertools.product((0, 1), repeat=len(widths))]
    )


def weighted_average_density(
    model: DensityModel,
    spec: DistortionSpec,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol: float = QUAD_ABS_TOL,
) -> DensityModel:
    """Density of Z = (1/c1) * sum_l lambda_l X_l, tabulated on a grid.

    Independent uniform sources give a piecewise polynomial per coordinate,
    evaluated exactly at the nodes; the grid contains every kink, so for
    L <= 2 the linear interpolant is exact. A tabulated joint density (L = 2,
    d = 1) is convolved numerically along the line x_2 = (z - a x_1) / b.
    """
    if model.L != spec.L:
        raise DimensionMismatch(f"density has L={model.L} sources but {spec.L} weights were given")
    if model.L == 1:
        return model
    if grid_size < 2:
        raise InvalidParameter(f"grid_size must be >= 2, got {grid_size}")
    coeffs = spec.weight_array / spec.c1

    if model.kind is DensityKind.UNIFORM:
        factors = []
        for j in range(model.d):
            widths = coeffs * (model.highs[:, j] - model.lows[:, j])
            shift = float(coeffs @ model.lows[:, j])
            nodes = np.unique(np.concatenate((np.linspace(0.0, widths.sum(), grid_size), _subset_sums(widths))))
            factors.append(DensityModel.from_grid([shift + nodes], uniform_sum_pdf(nodes, widths)))
        return DensityModel.from_factors(factors)

    if model.L != 2 or model.d != 1:
        raise InvalidParameter("the density of Z for a tabulated joint is available for L = 2, d = 1")
    a, b = coeffs
    x1_axis, x2_axis = model.axes
    z_nodes = np.linspace(a * x1_axis[0] + b * x2_axis[0], a * x1_axis[-1] + b * x2_axis[-1], grid_size)

    def f_z(z: float) -> float:
        lo = max(x1_axis[0], (z - b * x2_axis[-1]) / a)
        hi = min(x1_axis[-1], (z - b * x2_axis[0]) / a)
        if hi <= lo:
            return 0.0
        breaks = np.concatenate((x1_axis, (z - b * x2_axis) / a))
        integrand = lambda x1: float(model.pdf([x1, (z - a * x1) / b])) / b  # noqa: E731
        return integrate_1d(integrand, lo, hi, breaks, tol)

    values = np.array([f_z(float(z)) for z in z_nodes])
    debug_quad("tabulated density of Z", nodes=grid_size)
    return DensityModel.from_grid([z_nodes], values, L=1)
