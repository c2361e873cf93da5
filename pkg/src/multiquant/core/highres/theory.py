"""Asymptotic distortion of optimal common-center quantizers.

For r = 2 the cost splits into an irreducible part c2 plus c1 times the
squared error of quantizing Z = (1/c1) sum_l lambda_l X_l, so the classical
high-resolution formula applies to f_Z. For L = 2 and a general power r the
cost behaves near the pairwise optimum like an input-weighted quadratic form
with matrix B(z); the optimal distortion then approaches c4 at rate n^(-2/d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from multiquant.core.highres.density import DensityKind, DensityModel, uniform_sum_pdf
from multiquant.core.highres.quadrature import integrate_1d, integrate_2d
from multiquant.core.model import DistortionSpec, MultiDataset
from multiquant.core.quantizer import r2_remainder
from multiquant.utils.constants import QUAD_ABS_TOL
from multiquant.utils.debug import debug_quad
from multiquant.utils.exceptions import (
    DimensionMismatch,
    InvalidParameter,
    InvalidPower,
    UnknownConstant,
)

# Normalized second moments of the optimal lattice cells: interval and hexagon
KAPPA = {1: 1.0 / 12.0, 2: 5.0 / (18.0 * math.sqrt(3.0))}


def kappa_const(d: int) -> float:
    """Normalized second moment of the best known quantizer cell in d dimensions."""
    if d < 1:
        raise InvalidParameter(f"dimension must be >= 1, got {d}")
    if d not in KAPPA:
        raise UnknownConstant(f"the optimal cell constant is unknown for d={d}")
    return KAPPA[d]


@dataclass(frozen=True)
class HighResConstants:
    """Constants of the asymptotic distortion formulas.

    c1, c2 belong to the r = 2 decomposition; c3, c4 and alpha to the L = 2
    general-power case. Unused entries stay None.
    """

    c1: float
    c2: Optional[float] = None
    c3: Optional[float] = None
    c4: Optional[float] = None
    alpha: Optional[float] = None
    kappa_d: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.c1 > 0:
            raise InvalidParameter(f"c1 must be positive, got {self.c1}")
        if self.c3 is not None and not self.c3 > 0:
            raise InvalidParameter(f"c3 must be positive, got {self.c3}")
        for name in ("c2", "c4"):
            value = getattr(self, name)
            if value is None:
                continue
            if value < -1e-12:
                raise InvalidParameter(f"{name} must be nonnegative, got {value}")
            # Quadrature rounding
            if value < 0:
                object.__setattr__(self, name, 0.0)


@dataclass(frozen=True, eq=False)
class BMatrix:
    """The d x d weighting matrix B(z) of the input-weighted quadratic form."""

    z: np.ndarray
    matrix: np.ndarray

    @property
    def d(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix)) if self.d > 1 else float(self.matrix[0, 0])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def _check_pair(model: DensityModel, spec: DistortionSpec) -> None:
    if model.L != 2 or spec.L != 2:
        raise DimensionMismatch("this formula needs exactly L = 2 sources")
    if spec.r <= 1:
        raise InvalidPower(f"this formula needs r > 1, got {spec.r}")


def _over_support(func: Any, model: DensityModel, tol: float) -> float:
    """Integrate func(x) over the support of a single-source density."""
    if model.L != 1:
        raise DimensionMismatch(f"expected a single-source density, got L={model.L}")
    lows, highs = model.lows[0], model.highs[0]
    if model.d == 1:
        return integrate_1d(lambda x: func(np.array([x])), lows[0], highs[0], model.breakpoints(0, 0), tol)
    if model.d == 2:
        return integrate_2d(
            lambda x, y: func(np.array([x, y])),
            (lows[0], highs[0]),
            (lows[1], highs[1]),
            model.breakpoints(0, 0),
            model.breakpoints(0, 1),
            tol,
        )
    raise InvalidParameter(f"integration is available for d <= 2, got d={model.d}")


def density_pnorm(f: DensityModel, p: float, tol: float = QUAD_ABS_TOL) -> float:
    """(integral of f^p)^(1/p) for 0 < p <= 1."""
    if not 0 < p <= 1:
        raise InvalidParameter(f"p must lie in (0, 1], got {p}")
    if f.factors:
        return math.prod(density_pnorm(factor, p, tol) for factor in f.factors)
    integral = _over_support(lambda x: float(f.pdf(x)) ** p, f, tol)
    return integral ** (1.0 / p)


def _difference_pdfs(model: DensityModel) -> list[tuple[float, list[float]]]:
    """Per coordinate, (shift, widths) such that X1_j - X2_j - shift is a sum of uniforms."""
    out = []
    for j in range(model.d):
        w1 = model.highs[0, j] - model.lows[0, j]
        w2 = model.highs[1, j] - model.lows[1, j]
        out.append((model.lows[0, j] - model.highs[1, j], [w1, w2]))
    return out


def pair_moment(model: DensityModel, r: float, tol: float = QUAD_ABS_TOL) -> float:
    """E ||X1 - X2||^r for a two-source density."""
    if model.L != 2:
        raise DimensionMismatch("pair moments need exactly L = 2 sources")
    if r < 0:
        raise InvalidParameter(f"moment order must be >= 0, got {r}")
    if r == 0:
        return 1.0

    if model.kind is DensityKind.UNIFORM:
        # The coordinates of V = X1 - X2 are independent trapezoids
        parts = _difference_pdfs(model)

        def f_v(j: int, v: float) -> float:
            shift, widths = parts[j]
            return float(uniform_sum_pdf(np.array(v - shift), widths))

        def breaks(j: int) -> list[float]:
            shift, (w1, w2) = parts[j]
            return [shift, shift + w1, shift + w2, shift + w1 + w2, 0.0]

        ranges = [(s, s + sum(w)) for s, w in parts]
        if model.d == 1:
            return integrate_1d(lambda v: abs(v) ** r * f_v(0, v), *ranges[0], breaks(0), tol)
        if model.d == 2:
            return integrate_2d(
                lambda v1, v2: math.hypot(v1, v2) ** r * f_v(0, v1) * f_v(1, v2),
                ranges[0],
                ranges[1],
                breaks(0),
                breaks(1),
                tol,
            )
        raise InvalidParameter(f"pair moments are available for d <= 2, got d={model.d}")

    if model.d != 1:
        raise InvalidParameter("pair moments of a tabulated joint are available for d = 1")
    x1_axis, x2_axis = model.axes
    return integrate_2d(
        lambda x1, x2: abs(x1 - x2) ** r * float(model.pdf([x1, x2])),
        (x1_axis[0], x1_axis[-1]),
        (x2_axis[0], x2_axis[-1]),
        x1_axis,
        lambda x1: np.append(x2_axis, x1),
        tol,
    )


def expected_pair_moment(r: float) -> float:
    """E|X1 - X2|^r for independent sources uniform on [0, 1]."""
    if r < 0:
        raise InvalidParameter(f"moment order must be >= 0, got {r}")
    return 2.0 / ((r + 1.0) * (r + 2.0))


def pair_constants(alpha: float, r: float) -> tuple[float, float]:
    """(c3, c4 / E||X1 - X2||^r) for unit lambda_1."""
    c3 = r * alpha ** (r - 2.0) / (2.0 * (1.0 + alpha) ** (r - 3.0))
    c4_factor = (alpha / (1.0 + alpha)) ** (r - 1.0)
    return c3, c4_factor


def _kappa_or_none(d: int) -> Optional[float]:
    try:
        return kappa_const(d)
    except UnknownConstant:
        return None


def r2_constants(
    source: Union[MultiDataset, DensityModel],
    spec: DistortionSpec,
    tol: float = QUAD_ABS_TOL,
) -> HighResConstants:
    """c1 = sum(lambda) and c2 = E[remainder] of the r = 2 decomposition.

    c2 comes from the sample mean for a dataset, in closed form for
    independent uniform sources, and by quadrature for a tabulated joint.
    """
    if spec.r != 2:
        raise InvalidPower(f"the squared-error decomposition needs r = 2, got {spec.r}")
    if source.L != spec.L:
        raise DimensionMismatch(f"source has L={source.L} but {spec.L} weights were given")
    lam = spec.weight_array
    c1 = spec.c1

    if isinstance(source, MultiDataset):
        c2 = float(np.mean(r2_remainder(source, spec)))
    elif source.L == 1:
        c2 = 0.0
    elif source.kind is DensityKind.UNIFORM:
        means = (source.lows + source.highs) / 2.0
        variances = (source.highs - source.lows) ** 2 / 12.0
        second = np.sum(means**2 + variances, axis=1)
        mixed_mean = lam @ means
        mixed_var = (lam**2) @ variances
        c2 = float(lam @ second - (np.sum(mixed_mean**2) + np.sum(mixed_var)) / c1)
    elif source.L == 2:
        # sum(lambda ||x||^2) - ||sum(lambda x)||^2 / c1 = lambda1 lambda2 / c1 ||x1 - x2||^2
        c2 = lam[0] * lam[1] / c1 * pair_moment(source, 2.0, tol)
    else:
        raise InvalidParameter("c2 of a tabulated joint is available for L <= 2")

    alpha = c3 = c4 = None
    if spec.L == 2:
        alpha = spec.alpha
        c3, c4 = c1, c2
    return HighResConstants(c1=c1, c2=c2, c3=c3, c4=c4, alpha=alpha, kappa_d=_kappa_or_none(source.d))


def general_constants(
    model: DensityModel,
    spec: DistortionSpec,
    tol: float = QUAD_ABS_TOL,
) -> HighResConstants:
    """c3, c4 and alpha for two sources and a general power r > 1.

    Weights are normalized to lambda_1 = 1 and the scale is carried back
    into c3 and c4.
    """
    _check_pair(model, spec)
    normalized, scale = spec.normalized()
    alpha = normalized.alpha
    c3, c4_factor = pair_constants(alpha, spec.r)
    c4 = scale * c4_factor * pair_moment(model, spec.r, tol)
    c2 = c4 if spec.r == 2 else None
    return HighResConstants(
        c1=spec.c1,
        c2=c2,
        c3=scale * c3,
        c4=c4,
        alpha=alpha,
        kappa_d=_kappa_or_none(model.d),
    )


def theorem1_predict(consts: HighResConstants, fZ: DensityModel, n: int, d: int) -> float:
    """c2 + c1 kappa_d n^(-2/d) ||f_Z||_{d/(d+2)}."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if fZ.d != d:
        raise DimensionMismatch(f"density of Z has d={fZ.d}, expected {d}")
    if consts.c2 is None:
        raise InvalidParameter("constants lack c2; compute them with r2_constants")
    kappa = kappa_const(d)
    norm = density_pnorm(fZ, d / (d + 2.0))
    return consts.c2 + consts.c1 * kappa * n ** (-2.0 / d) * norm


def _v_window(model: DensityModel, z: np.ndarray, alpha: float) -> Optional[list[tuple[float, float, list[float]]]]:
    """Per coordinate, the v-interval where both sources lie in the support.

    x1 = z + t1 v and x2 = z - t2 v with t1 = alpha/(1+alpha), t2 = 1/(1+alpha).
    Returns None when the window is empty.
    """
    t1 = alpha / (1.0 + alpha)
    t2 = 1.0 / (1.0 + alpha)
    window = []
    for j in range(model.d):
        lo1, hi1 = model.lows[0, j], model.highs[0, j]
        lo2, hi2 = model.lows[1, j], model.highs[1, j]
        a = max((lo1 - z[j]) / t1, (z[j] - hi2) / t2)
        b = min((hi1 - z[j]) / t1, (z[j] - lo2) / t2)
        if not b > a:
            return None
        breaks = [0.0]
        if model.kind is DensityKind.GRID:
            breaks.extend(((model.breakpoints(0, j) - z[j]) / t1).tolist())
            breaks.extend(((z[j] - model.breakpoints(1, j)) / t2).tolist())
        window.append((a, b, breaks))
    return window


def bz_numeric(
    model: DensityModel,
    z: Any,
    spec: DistortionSpec,
    tol: float = QUAD_ABS_TOL,
) -> BMatrix:
    """B(z) = integral of ||v||^(r-2) (I + (r-2) v v^T/||v||^2) f(z + t1 v, z - t2 v) dv.

    Zero outside the set of reachable z. Off-diagonal entries are computed
    once, so the matrix is exactly symmetric.
    """
    _check_pair(model, spec)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (model.d,):
        raise DimensionMismatch(f"z has shape {z.shape}, expected ({model.d},)")
    r = spec.r
    alpha = spec.alpha
    t1 = alpha / (1.0 + alpha)
    t2 = 1.0 / (1.0 + alpha)
    window = _v_window(model, z, alpha)
    matrix = np.zeros((model.d, model.d))
    if window is None:
        return BMatrix(z, matrix)
    uniform = model.kind is DensityKind.UNIFORM

    def density(v: np.ndarray) -> float:
        # Constant over the window for independent uniform sources
        if uniform:
            return 1.0 / model.volume
        return float(model.pdf(np.concatenate((z + t1 * v, z - t2 * v))))

    if model.d == 1:
        a, b, breaks = window[0]

        def integrand(v: float) -> float:
            if v == 0.0 and r < 2:
                return 0.0
            return (r - 1.0) * abs(v) ** (r - 2.0) * density(np.array([v]))

        matrix[0, 0] = integrate_1d(integrand, a, b, breaks, tol)
        return BMatrix(z, matrix)

    if model.d != 2:
        raise InvalidParameter(f"B(z) is available for d <= 2, got d={model.d}")
    (a1, b1, br1), (a2, b2, br2) = window

    def entry(i: int, k: int) -> float:
        def integrand(v1: float, v2: float) -> float:
            norm = math.hypot(v1, v2)
            if norm == 0.0:
                return 0.0
            v = np.array([v1, v2])
            shape = (1.0 if i == k else 0.0) + (r - 2.0) * v[i] * v[k] / norm**2
            return norm ** (r - 2.0) * shape * density(v)

        return integrate_2d(integrand, (a1, b1), (a2, b2), br1, br2, tol)

    matrix[0, 0] = entry(0, 0)
    matrix[1, 1] = entry(1, 1)
    matrix[0, 1] = matrix[1, 0] = entry(0, 1)
    return BMatrix(z, matrix)


def z_support(model: DensityModel, alpha: float) -> list[tuple[float, float, list[float]]]:
    """Per coordinate, the range of z = (x1 + alpha x2)/(1 + alpha) and its kinks."""
    t1 = alpha / (1.0 + alpha)
    t2 = 1.0 / (1.0 + alpha)
    out = []
    for j in range(model.d):
        b1 = model.breakpoints(0, j)
        b2 = model.breakpoints(1, j)
        lo = t2 * b1[0] + t1 * b2[0]
        hi = t2 * b1[-1] + t1 * b2[-1]
        kinks = np.concatenate((t2 * b1 + t1 * b2[0], t2 * b1 + t1 * b2[-1], t2 * b1[0] + t1 * b2, t2 * b1[-1] + t1 * b2))
        out.append((lo, hi, kinks.tolist()))
    return out


def b_density_integral(model: DensityModel, spec: DistortionSpec, tol: float = QUAD_ABS_TOL) -> float:
    """Integral of det(B(z))^(1/(d+2)) over the reachable z."""
    _check_pair(model, spec)
    d = model.d
    alpha = spec.alpha
    support = z_support(model, alpha)
    exponent = 1.0 / (d + 2.0)

    def g(z: np.ndarray) -> float:
        return max(bz_numeric(model, z, spec, tol).det, 0.0) ** exponent

    if d == 1:
        lo, hi, kinks = support[0]
        return integrate_1d(lambda z: g(np.array([z])), lo, hi, kinks, tol)
    if d == 2:
        (lo1, hi1, k1), (lo2, hi2, k2) = support
        return integrate_2d(lambda z1, z2: g(np.array([z1, z2])), (lo1, hi1), (lo2, hi2), k1, k2, tol)
    raise InvalidParameter(f"B(z) is available for d <= 2, got d={d}")


def theorem2_predict(
    model: DensityModel,
    spec: DistortionSpec,
    n: int,
    d: Optional[int] = None,
    tol: float = QUAD_ABS_TOL,
) -> float:
    """c4 + c3 kappa_d n^(-2/d) ||det(B)^(1/d)||_{d/(d+2)}."""
    d = model.d if d is None else d
    if d != model.d:
        raise DimensionMismatch(f"density has d={model.d}, expected {d}")
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    kappa = kappa_const(d)
    consts = general_constants(model, spec, tol)
    integral = b_density_integral(model, spec, tol)
    norm = integral ** ((d + 2.0) / d)
    debug_quad("asymptotic prediction", r=spec.r, n=n, c3=consts.c3, c4=consts.c4, norm=norm)
    return consts.c4 + consts.c3 * kappa * n ** (-2.0 / d) * norm
