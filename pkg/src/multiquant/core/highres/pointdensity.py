"""Optimal point densities and codebooks placed by inverse transform.

A point density is tabulated on a grid over its support together with the
cumulative function Lambda at the nodes. Lambda between nodes is the node
value plus an adaptive quadrature of the unnormalized shape over the partial
panel, so evaluation and inversion agree with the tabulation exactly at the
nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np
from scipy.optimize import brentq

from multiquant.core.highres.density import DensityModel, weighted_average_density
from multiquant.core.highres.quadrature import integrate_1d, panel_edges, quad_panel
from multiquant.core.highres.theory import bz_numeric, z_support
from multiquant.core.model import Codebook, DistortionSpec
from multiquant.utils.constants import DEFAULT_GRID_SIZE, QUAD_ABS_TOL
from multiquant.utils.debug import debug_quad
from multiquant.utils.exceptions import DimensionMismatch, InvalidParameter, QuadratureFailure

# brentq rejects rtol below 4 * machine epsilon
_BRENTQ_RTOL = 4.0 * float(np.finfo(float).eps)


@dataclass(frozen=True, eq=False)
class PointDensity:
    """Normalized one-dimensional point density with its cumulative function."""

    lo: float
    hi: float
    nodes: np.ndarray
    density: np.ndarray
    cumulative: np.ndarray
    total: float
    shape: Callable[[float], float] = field(repr=False)

    @classmethod
    def from_shape(
        cls,
        shape: Callable[[float], float],
        lo: float,
        hi: float,
        breakpoints: Iterable[float] = (),
        grid_size: int = DEFAULT_GRID_SIZE,
        tol: float = QUAD_ABS_TOL,
    ) -> PointDensity:
        """Normalize an unnormalized nonnegative shape on [lo, hi].

        The grid holds ``grid_size`` equispaced nodes plus the breakpoints.
        """
        if not hi > lo:
            raise InvalidParameter(f"support [{lo}, {hi}] is empty")
        if grid_size < 2:
            raise InvalidParameter(f"grid_size must be >= 2, got {grid_size}")
        nodes = panel_edges(np.concatenate((np.linspace(lo, hi, grid_size), list(breakpoints))), lo, hi)
        panel_tol = tol / (nodes.size - 1)
        masses = [quad_panel(shape, float(a), float(b), panel_tol) for a, b in zip(nodes[:-1], nodes[1:])]
        total = math.fsum(masses)
        if not total > 0:
            raise QuadratureFailure("point density shape has zero mass")
        cumulative = np.concatenate(([0.0], np.cumsum(masses))) / total
        cumulative = np.minimum(np.maximum.accumulate(cumulative), 1.0)
        cumulative[-1] = 1.0
        density = np.array([shape(float(x)) for x in nodes]) / total
        for array in (nodes, density, cumulative):
            array.setflags(write=False)
        debug_quad("point density tabulated", nodes=nodes.size, total=total)
        return cls(float(lo), float(hi), nodes, density, cumulative, total, shape)

    @property
    def support(self) -> tuple[float, float]:
        return self.lo, self.hi

    def pdf(self, z: Any) -> np.ndarray:
        """Normalized density; zero outside the support."""
        zs = np.asarray(z, dtype=float)
        values = [
            self.shape(float(x)) / self.total if self.lo <= x <= self.hi else 0.0
            for x in zs.reshape(-1)
        ]
        return np.array(values).reshape(zs.shape)

    def _cdf_scalar(self, x: float) -> float:
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return 1.0
        k = int(np.searchsorted(self.nodes, x, side="right")) - 1
        partial = quad_panel(self.shape, float(self.nodes[k]), x) / self.total
        return min(float(self.cumulative[k]) + partial, float(self.cumulative[k + 1]))

    def cdf(self, z: Any) -> np.ndarray:
        """Lambda(z), the integral of the density up to z."""
        zs = np.asarray(z, dtype=float)
        return np.array([self._cdf_scalar(float(x)) for x in zs.reshape(-1)]).reshape(zs.shape)

    def inverse(self, p: float) -> float:
        """z with Lambda(z) = p, by bracketed root finding inside the node panel."""
        if not 0 <= p <= 1:
            raise InvalidParameter(f"probability must lie in [0, 1], got {p}")
        if p <= 0:
            return self.lo
        if p >= 1:
            return self.hi
        # Panel k satisfies cumulative[k] < p <= cumulative[k + 1]
        k = int(np.searchsorted(self.cumulative, p, side="left")) - 1
        a, b = float(self.nodes[k]), float(self.nodes[k + 1])
        return float(brentq(lambda x: self._cdf_scalar(x) - p, a, b, xtol=1e-15, rtol=_BRENTQ_RTOL))

    def mass(self) -> float:
        """Integral of the normalized density, recomputed panel by panel."""
        return integrate_1d(lambda x: self.shape(x) / self.total, self.lo, self.hi, self.nodes)


def inverse_transform_codebook(pd: PointDensity, n: int) -> Codebook:
    """n centers at Lambda^{-1}((2i - 1) / (2n)), i = 1..n, in increasing order."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    points = [pd.inverse((2.0 * i - 1.0) / (2.0 * n)) for i in range(1, n + 1)]
    return Codebook(np.array(points).reshape(-1, 1))


def optimal_point_density(
    model: DensityModel,
    spec: DistortionSpec,
    d: int = 1,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol: float = QUAD_ABS_TOL,
) -> PointDensity:
    """Optimal point density of a one-dimensional common-center quantizer.

    Proportional to f_Z^(1/3) for r = 2 (any L) and to B(z)^(1/3) for two
    sources and a general power. A single source with r != 2 follows the
    classical r-th power law f^(1/(1+r)).
    """
    if d != 1 or model.d != 1:
        raise InvalidParameter("tabulated point densities are produced for d = 1 only")
    if model.L != spec.L:
        raise DimensionMismatch(f"density has L={model.L} sources but {spec.L} weights were given")

    if spec.r == 2 or model.L == 1:
        f_z = weighted_average_density(model, spec, grid_size, tol)
        exponent = 1.0 / 3.0 if spec.r == 2 else 1.0 / (1.0 + spec.r)
        lo, hi = float(f_z.lows[0, 0]), float(f_z.highs[0, 0])

        def shape(z: float) -> float:
            return float(f_z.pdf(z)) ** exponent

        return PointDensity.from_shape(shape, lo, hi, f_z.breakpoints(0, 0), grid_size, tol)

    if model.L != 2:
        raise InvalidParameter("point densities for r != 2 need exactly L = 2 sources")
    lo, hi, kinks = z_support(model, spec.alpha)[0]

    def b_shape(z: float) -> float:
        return max(bz_numeric(model, [z], spec, tol).det, 0.0) ** (1.0 / 3.0)

    return PointDensity.from_shape(b_shape, lo, hi, kinks, grid_size, tol)
