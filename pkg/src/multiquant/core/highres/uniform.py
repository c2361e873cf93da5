"""Closed forms for two independent sources uniform on [0, 1] (d = 1).

B(z) is piecewise: a rising power on [0, 1/(1+a)], a symmetric middle piece
on [1/(1+a), a/(1+a)] and a falling power on [a/(1+a), 1], zero outside
[0, 1]. For iid sources B(z; alpha) = B(z; 1/alpha), so alpha < 1 is mapped
to 1/alpha.
"""

from __future__ import annotations

import math

from multiquant.core.highres.pointdensity import PointDensity
from multiquant.core.highres.quadrature import integrate_1d
from multiquant.core.highres.theory import expected_pair_moment, kappa_const, pair_constants
from multiquant.utils.constants import DEFAULT_GRID_SIZE, QUAD_ABS_TOL
from multiquant.utils.exceptions import InvalidParameter, InvalidPower


def _check_power(r: float) -> None:
    if not r > 1:
        raise InvalidPower(f"the closed forms need r > 1, got {r}")


def canonical_alpha(alpha: float) -> float:
    """max(alpha, 1/alpha)."""
    if not alpha > 0 or not math.isfinite(alpha):
        raise InvalidParameter(f"alpha must be positive and finite, got {alpha}")
    return alpha if alpha >= 1 else 1.0 / alpha


def weight_to_alpha(lambda2: float, r: float) -> float:
    """alpha = lambda2^(1/(r-1)) for lambda1 = 1."""
    _check_power(r)
    if not lambda2 > 0:
        raise InvalidParameter(f"lambda2 must be positive, got {lambda2}")
    return lambda2 ** (1.0 / (r - 1.0))


def example2_bz(z: float, r: float, alpha: float) -> float:
    """B(z) for iid uniform [0, 1] sources."""
    _check_power(r)
    a = canonical_alpha(alpha)
    if z < 0 or z > 1:
        return 0.0
    e = r - 1.0
    edge_lo = 1.0 / (1.0 + a)
    edge_hi = a / (1.0 + a)
    if z <= edge_lo:
        return z**e * (1.0 + a) ** e * (1.0 + a ** (-e))
    if z <= edge_hi:
        return ((1.0 + a) / a) ** e * ((1.0 - z) ** e + z**e)
    return (1.0 - z) ** e * (1.0 + a) ** e * (1.0 + a ** (-e))


def example2_norm_constant(r: float, alpha: float, tol: float = QUAD_ABS_TOL) -> float:
    """Integral of B(z)^(1/3) over [0, 1].

    The two outer pieces integrate in closed form; the middle piece is
    evaluated numerically and vanishes for alpha = 1.
    """
    _check_power(r)
    a = canonical_alpha(alpha)
    if a == 1.0:
        return 3.0 * 2.0 ** (1.0 / 3.0) / (r + 2.0)
    outer = 6.0 / ((r + 2.0) * (1.0 + a)) * (1.0 + a ** (1.0 - r)) ** (1.0 / 3.0)
    e = r - 1.0
    middle = integrate_1d(
        lambda z: ((1.0 - z) ** e + z**e) ** (1.0 / 3.0),
        1.0 / (1.0 + a),
        a / (1.0 + a),
        (0.5,),
        tol,
    )
    return outer + (1.0 + 1.0 / a) ** (e / 3.0) * middle


def example2_predict(r: float, lambda2: float, n: int, tol: float = QUAD_ABS_TOL) -> float:
    """Asymptotic optimal distortion for iid uniform [0, 1] sources, lambda1 = 1."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    alpha = weight_to_alpha(lambda2, r)
    c3, c4_factor = pair_constants(alpha, r)
    c4 = c4_factor * expected_pair_moment(r)
    norm = example2_norm_constant(r, alpha, tol) ** 3
    return c4 + c3 * kappa_const(1) * norm / n**2


def example2_point_density(
    r: float,
    lambda2: float,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol: float = QUAD_ABS_TOL,
) -> PointDensity:
    """Point density proportional to B(z)^(1/3) from the closed form."""
    alpha = weight_to_alpha(lambda2, r)
    a = canonical_alpha(alpha)
    return PointDensity.from_shape(
        lambda z: example2_bz(z, r, alpha) ** (1.0 / 3.0),
        0.0,
        1.0,
        (1.0 / (1.0 + a), a / (1.0 + a)),
        grid_size,
        tol,
    )
