"""Distortion evaluation, generalized Voronoi assignment and per-cell centers.

The cost of sample i at center u is sum_l lambda_l * ||u - y_{l,i}||^r. A
codebook assigns each sample to the center with the lowest cost (lowest
index on ties), and each center is the minimizer of the summed cost over its
cell. That minimization is convex for every r >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from multiquant.core.model import Codebook, DistortionSpec, MultiDataset, MultiSample
from multiquant.utils.constants import (
    CHUNK_SIZE,
    DEFAULT_CENTER_MAX_ITERS,
    DEFAULT_CENTER_TOL,
    SMOOTHING_EPS,
)
from multiquant.utils.debug import debug_center
from multiquant.utils.exceptions import (
    DimensionMismatch,
    EmptyCell,
    InvalidParameter,
    InvalidPower,
    NoConvergence,
)

CellLike = Union[MultiDataset, np.ndarray, "list[MultiSample]"]

# Armijo sufficient-decrease constant and smallest step tried by the line search
_ARMIJO = 1e-4
_MIN_STEP = 1e-20


@dataclass(frozen=True, eq=False)
class CellAssignment:
    """Generalized Voronoi assignment of every sample."""

    labels: np.ndarray
    per_sample_cost: np.ndarray

    @property
    def distortion(self) -> float:
        return float(np.mean(self.per_sample_cost))

    def cell_sizes(self, n: int) -> np.ndarray:
        return np.bincount(self.labels, minlength=n)


@dataclass(frozen=True, eq=False)
class CenterSolution:
    """Result of a per-cell center computation."""

    center: np.ndarray
    objective: float
    gradient_norm: float
    iterations: int = 0
    converged: bool = True


def _as_matrix(sample: Any) -> np.ndarray:
    if isinstance(sample, MultiSample):
        return sample.observations
    return np.asarray(sample, dtype=float)


def _cell_array(cell: CellLike) -> np.ndarray:
    """Stack a cell given as dataset, array or list of samples into (k, L, d)."""
    if isinstance(cell, MultiDataset):
        return cell.observations
    if isinstance(cell, np.ndarray):
        array = np.asarray(cell, dtype=float)
    else:
        if len(cell) == 0:
            raise EmptyCell("cell has no samples")
        array = np.stack([_as_matrix(s) for s in cell])
    if array.ndim != 3:
        raise DimensionMismatch(f"cell must have shape (k, L, d), got {array.shape}")
    return array


def _check_spec(L: int, spec: DistortionSpec) -> None:
    if L != spec.L:
        raise DimensionMismatch(f"samples have L={L} observations but {spec.L} weights were given")


def sample_cost(u: Any, s: Any, spec: DistortionSpec) -> float:
    """sum_l lambda_l * ||u - y_l||^r for one sample."""
    obs = _as_matrix(s)
    u = np.asarray(u, dtype=float).reshape(-1)
    if obs.ndim != 2 or obs.shape[1] != u.shape[0]:
        raise DimensionMismatch(f"center of dimension {u.shape[0]} vs sample of shape {obs.shape}")
    _check_spec(obs.shape[0], spec)
    sq = np.sum((obs - u) ** 2, axis=1)
    powered = sq if spec.r == 2 else sq ** (spec.r / 2.0)
    return float(np.dot(spec.weight_array, powered))


def cost_matrix(centers: Any, ds: MultiDataset, spec: DistortionSpec) -> np.ndarray:
    """Costs of every sample at every center, shape (m, n).

    Evaluated in fixed blocks of samples so memory stays bounded and the
    result does not depend on how callers split work.
    """
    centers = np.asarray(centers.centers if isinstance(centers, Codebook) else centers, dtype=float)
    if centers.ndim == 1:
        centers = centers.reshape(-1, 1)
    if centers.shape[1] != ds.d:
        raise DimensionMismatch(f"centers have d={centers.shape[1]}, dataset has d={ds.d}")
    spec.check_dataset(ds)

    weights = spec.weight_array
    half_r = spec.r / 2.0
    out = np.empty((ds.m, centers.shape[0]))
    for start in range(0, ds.m, CHUNK_SIZE):
        block = ds.observations[start : start + CHUNK_SIZE]
        diff = block[:, None, :, :] - centers[None, :, None, :]
        sq = np.einsum("bnld,bnld->bnl", diff, diff)
        powered = sq if spec.r == 2 else sq**half_r
        out[start : start + block.shape[0]] = powered @ weights
    return out


def assign(cb: Codebook, ds: MultiDataset, spec: DistortionSpec) -> CellAssignment:
    """Map each sample to its lowest-cost center; ties go to the lowest index."""
    costs = cost_matrix(cb.centers, ds, spec)
    labels = np.argmin(costs, axis=1)
    per_sample = costs[np.arange(ds.m), labels]
    labels.setflags(write=False)
    per_sample.setflags(write=False)
    return CellAssignment(labels=labels, per_sample_cost=per_sample)


def empirical_distortion(cb: Codebook, ds: MultiDataset, spec: DistortionSpec) -> float:
    """(1/m) sum_i min_k cost(u_k, s_i)."""
    return float(np.mean(np.min(cost_matrix(cb.centers, ds, spec), axis=1)))


def weighted_average(ds: Any, spec: DistortionSpec) -> np.ndarray:
    """z_i = (1/c1) sum_l lambda_l y_{l,i}, shape (m, d)."""
    obs = _cell_array(ds)
    _check_spec(obs.shape[1], spec)
    return np.einsum("l,mld->md", spec.weight_array, obs) / spec.c1


def r2_remainder(ds: Any, spec: DistortionSpec) -> np.ndarray:
    """Per-sample sum_l lambda_l ||y_l||^2 - (1/c1) ||sum_l lambda_l y_l||^2.

    For r = 2 the cost splits as this remainder plus c1 * ||u - z_i||^2.
    """
    obs = _cell_array(ds)
    _check_spec(obs.shape[1], spec)
    weights = spec.weight_array
    energy = np.einsum("l,ml->m", weights, np.sum(obs**2, axis=2))
    weighted_sum = np.einsum("l,mld->md", weights, obs)
    return energy - np.sum(weighted_sum**2, axis=1) / spec.c1


def _pair_alpha(lambda2: float, r: float) -> float:
    if r <= 1:
        raise InvalidPower(f"the closed-form pair optimum needs r > 1, got r={r}")
    if lambda2 <= 0:
        raise InvalidParameter(f"lambda2 must be positive, got {lambda2}")
    return float(lambda2 ** (1.0 / (r - 1.0)))


def lemma1_centers(x1s: Any, x2s: Any, lambda2: float, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized pair optimum: centers (k, d) and attained costs (k,)."""
    alpha = _pair_alpha(lambda2, r)
    x1s = np.asarray(x1s, dtype=float)
    x2s = np.asarray(x2s, dtype=float)
    centers = (x1s + alpha * x2s) / (1.0 + alpha)
    gap = np.linalg.norm(x1s - x2s, axis=-1)
    objectives = (alpha / (1.0 + alpha)) ** (r - 1.0) * gap**r
    return centers, objectives


def lemma1_center(x1: Any, x2: Any, lambda2: float, r: float) -> CenterSolution:
    """Global minimizer of ||x1 - u||^r + lambda2 * ||x2 - u||^r.

    The minimizer is (x1 + alpha*x2)/(1 + alpha) with alpha = lambda2^(1/(r-1)),
    attaining (alpha/(1+alpha))^(r-1) * ||x1 - x2||^r.
    """
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    x2 = np.asarray(x2, dtype=float).reshape(-1)
    if x1.shape != x2.shape:
        raise DimensionMismatch(f"points have shapes {x1.shape} and {x2.shape}")
    centers, objectives = lemma1_centers(x1[None, :], x2[None, :], lambda2, r)
    center = centers[0]

    grad = np.zeros_like(center)
    for point, weight in ((x1, 1.0), (x2, lambda2)):
        w = center - point
        norm = np.linalg.norm(w)
        if norm > 0:
            grad += weight * r * norm ** (r - 2.0) * w
    return CenterSolution(
        center=center,
        objective=float(objectives[0]),
        gradient_norm=float(np.linalg.norm(grad)),
    )


def _cell_objective(u: np.ndarray, obs: np.ndarray, spec: DistortionSpec) -> float:
    sq = np.sum((obs - u) ** 2, axis=2)
    powered = sq if spec.r == 2 else sq ** (spec.r / 2.0)
    return float(np.sum(powered @ spec.weight_array))


def cell_objective(u: Any, cell: CellLike, spec: DistortionSpec) -> float:
    """sum over the cell of sample_cost(u, s_i)."""
    obs = _cell_array(cell)
    _check_spec(obs.shape[1], spec)
    return _cell_objective(np.asarray(u, dtype=float).reshape(-1), obs, spec)


def center_r2(cell: CellLike, spec: DistortionSpec) -> CenterSolution:
    """Closed-form r = 2 center: the mean of the per-sample weighted averages."""
    if spec.r != 2:
        raise InvalidParameter(f"closed-form center needs r = 2, got r={spec.r}")
    obs = _cell_array(cell)
    if obs.shape[0] == 0:
        raise EmptyCell("cell has no samples")
    _check_spec(obs.shape[1], spec)
    center = np.mean(weighted_average(obs, spec), axis=0)
    residual = 2.0 * np.einsum("l,kld->d", spec.weight_array, center - obs)
    return CenterSolution(
        center=center,
        objective=_cell_objective(center, obs, spec),
        gradient_norm=float(np.linalg.norm(residual)),
    )


class _SmoothedObjective:
    """u -> sum_j w_j (||u - p_j||^2 + eps)^(r/2) over flattened cell points."""

    def __init__(self, obs: np.ndarray, spec: DistortionSpec, eps: float) -> None:
        k, L, d = obs.shape
        self.points = obs.reshape(k * L, d)
        self.weights = np.tile(spec.weight_array, k)
        self.r = spec.r
        self.eps = eps

    def value(self, u: np.ndarray) -> float:
        sq = np.sum((u - self.points) ** 2, axis=1) + self.eps
        return float(np.dot(self.weights, sq ** (self.r / 2.0)))

    def derivatives(self, u: np.ndarray, hessian: bool) -> tuple[float, np.ndarray, np.ndarray, Optional[np.ndarray]]:
        """Value, gradient, reweighting coefficients and (optionally) Hessian."""
        diff = u - self.points
        sq = np.sum(diff**2, axis=1) + self.eps
        coef = self.weights * self.r * sq ** (self.r / 2.0 - 1.0)
        value = float(np.dot(self.weights, sq ** (self.r / 2.0)))
        grad = coef @ diff
        hess = None
        if hessian:
            # r ||w||^(r-2) (I + (r-2) w w^T / ||w||^2), smoothed
            scaled = diff * ((self.r - 2.0) * coef / sq)[:, None]
            hess = np.eye(u.shape[0]) * np.sum(coef) + scaled.T @ diff
        return value, grad, coef, hess


def center_general(
    cell: CellLike,
    spec: DistortionSpec,
    tol: float = DEFAULT_CENTER_TOL,
    max_iters: int = DEFAULT_CENTER_MAX_ITERS,
    start: Optional[Any] = None,
    strict: bool = False,
) -> CenterSolution:
    """Minimize u -> sum_i sum_l lambda_l ||u - y_{l,i}||^r over one cell.

    The objective is smoothed as (||u - y||^2 + eps)^(r/2) so the gradient is
    defined at data points when r < 2. Each iteration takes a reweighted step,
    the weighted mean with weights lambda_l * r * (||u - y||^2 + eps)^((r-2)/2)
    for r = 1 and a Newton step on the same reweighted curvature for r > 1,
    and backtracks until the smoothed objective decreases.

    Stops when ||grad|| <= tol * (1 + objective). Exhausting ``max_iters``
    returns the best iterate with ``converged=False``, or raises
    :class:`NoConvergence` carrying it when ``strict`` is set.
    """
    obs = _cell_array(cell)
    if obs.shape[0] == 0:
        raise EmptyCell("cell has no samples")
    _check_spec(obs.shape[1], spec)
    if spec.r == 2:
        return center_r2(obs, spec)

    fn = _SmoothedObjective(obs, spec, SMOOTHING_EPS)
    if start is None:
        u = np.mean(weighted_average(obs, spec), axis=0)
    else:
        u = np.array(start, dtype=float).reshape(-1)
        if u.shape[0] != obs.shape[2]:
            raise DimensionMismatch(f"start has dimension {u.shape[0]}, cell has d={obs.shape[2]}")

    use_newton = spec.r > 1
    value, grad, coef, hess = fn.derivatives(u, use_newton)
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        gnorm = float(np.linalg.norm(grad))
        if gnorm <= tol * (1.0 + abs(value)):
            converged = True
            break

        direction = -grad / np.sum(coef)
        if use_newton and hess is not None:
            try:
                newton = -np.linalg.solve(hess, grad)
                if np.all(np.isfinite(newton)) and float(np.dot(newton, grad)) < 0:
                    direction = newton
            except np.linalg.LinAlgError:
                pass

        slope = float(np.dot(grad, direction))
        step = 1.0
        accepted = False
        while step >= _MIN_STEP:
            candidate = u + step * direction
            cand_value = fn.value(candidate)
            if cand_value <= value + _ARMIJO * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # No representable decrease left: numerically stationary
            converged = True
            break
        u = candidate
        value, grad, coef, hess = fn.derivatives(u, use_newton)

    gradient_norm = float(np.linalg.norm(grad))
    solution = CenterSolution(
        center=u,
        objective=_cell_objective(u, obs, spec),
        gradient_norm=gradient_norm,
        iterations=iterations,
        converged=converged,
    )
    if not converged:
        debug_center("center solver hit iteration cap", iterations=iterations, grad=gradient_norm)
        if strict:
            raise NoConvergence(
                f"center solver did not converge in {max_iters} iterations", solution=solution
            )
    return solution
