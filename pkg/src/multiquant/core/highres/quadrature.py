"""Adaptive quadrature helpers over piecewise-smooth integrands.

Integrals are split into panels at caller-supplied breakpoints (kinks,
support edges, singular points) and each panel goes through QUADPACK's
adaptive Gauss-Kronrod rule. Panel results are summed with ``math.fsum`` in
panel order, so the result does not depend on evaluation order.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Union

import numpy as np
from scipy import integrate

from multiquant.utils.constants import (
    QUAD_ABS_TOL,
    QUAD_FAILURE_TOL,
    QUAD_REL_TOL,
    QUAD_SUBDIVISIONS,
)
from multiquant.utils.debug import debug_quad
from multiquant.utils.exceptions import QuadratureFailure

Breakpoints = Union[Iterable[float], Callable[[float], Iterable[float]]]


def panel_edges(breakpoints: Iterable[float], lo: float, hi: float) -> np.ndarray:
    """Sorted unique breakpoints clipped to [lo, hi], always including both ends."""
    points = np.asarray(list(breakpoints), dtype=float)
    points = points[np.isfinite(points)]
    inside = points[(points > lo) & (points < hi)]
    return np.unique(np.concatenate(([lo], inside, [hi])))


def quad_panel(
    func: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_ABS_TOL,
) -> float:
    """Integrate func over [a, b] with one adaptive QUADPACK call.

    Raises:
        QuadratureFailure: QUADPACK flagged the panel and its error estimate
            exceeds QUAD_FAILURE_TOL, or the result is not finite.
    """
    if b <= a:
        return 0.0
    result = integrate.quad(
        func,
        a,
        b,
        epsabs=tol,
        epsrel=QUAD_REL_TOL,
        limit=QUAD_SUBDIVISIONS,
        full_output=1,
    )
    value, error = float(result[0]), float(result[1])
    if not math.isfinite(value):
        raise QuadratureFailure(f"non-finite integral on [{a}, {b}]")
    if len(result) > 3 and error > QUAD_FAILURE_TOL * max(1.0, abs(value)):
        debug_quad("panel flagged", a=a, b=b, error=error, message=result[3])
        raise QuadratureFailure(
            f"quadrature on [{a}, {b}] did not converge (error estimate {error:.3g})"
        )
    return value


def integrate_1d(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    breakpoints: Iterable[float] = (),
    tol: float = QUAD_ABS_TOL,
) -> float:
    """Integrate func over [lo, hi], split into panels at the breakpoints.

    The tolerance is shared evenly between panels.
    """
    if hi <= lo:
        return 0.0
    edges = panel_edges(breakpoints, lo, hi)
    panels = len(edges) - 1
    per_panel = tol / panels
    values = [quad_panel(func, float(a), float(b), per_panel) for a, b in zip(edges[:-1], edges[1:])]
    return math.fsum(values)


def integrate_2d(
    func: Callable[[float, float], float],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    x_breaks: Iterable[float] = (),
    y_breaks: Breakpoints = (),
    tol: float = QUAD_ABS_TOL,
) -> float:
    """Iterated integral of func(x, y) over a rectangle.

    ``y_breaks`` may be a callable returning the inner breakpoints for a
    given x, for kinks that are not axis-aligned.
    """
    x_lo, x_hi = x_range
    y_lo, y_hi = y_range
    if x_hi <= x_lo or y_hi <= y_lo:
        return 0.0
    inner_tol = tol / max(1.0, x_hi - x_lo)
    if not callable(y_breaks):
        y_breaks = list(y_breaks)

    def inner(x: float) -> float:
        breaks = y_breaks(x) if callable(y_breaks) else y_breaks
        return integrate_1d(lambda y: func(x, y), y_lo, y_hi, breaks, inner_tol)

    return integrate_1d(inner, x_lo, x_hi, x_breaks, tol)
