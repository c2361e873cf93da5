"""Generalized Lloyd iteration with seeding, empty-cell repair and multistart.

Each iteration recomputes every center as the convex minimizer of its cell's
summed cost, then reassigns samples to generalized Voronoi cells. Both steps
never increase the average distortion, so the recorded history is
non-increasing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from multiquant.core.model import Codebook, DistortionSpec, FitInfo, MultiDataset
from multiquant.core.quantizer import (
    CellAssignment,
    assign,
    cell_objective,
    center_general,
    center_r2,
    cost_matrix,
    lemma1_centers,
    weighted_average,
)
from multiquant.utils.constants import (
    DEFAULT_CENTER_MAX_ITERS,
    DEFAULT_CENTER_TOL,
    DEFAULT_MAX_ITERS,
    DEFAULT_REL_TOL,
    DEFAULT_RESTARTS,
)
from multiquant.utils.debug import debug_fit
from multiquant.utils.exceptions import InvalidParameter, TooManyCenters

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class FitOptions:
    """Options of a Lloyd fit."""

    n: int
    max_iters: int = DEFAULT_MAX_ITERS
    rel_tol: float = DEFAULT_REL_TOL
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    center_tol: float = DEFAULT_CENTER_TOL
    center_max_iters: int = DEFAULT_CENTER_MAX_ITERS
    threads: Optional[int] = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParameter(f"n must be >= 1, got {self.n}")
        if self.max_iters < 1:
            raise InvalidParameter(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.rel_tol > 0:
            raise InvalidParameter(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.restarts < 1:
            raise InvalidParameter(f"restarts must be >= 1, got {self.restarts}")
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)

    def with_seed(self, seed: int) -> FitOptions:
        return FitOptions(
            n=self.n,
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            restarts=self.restarts,
            seed=seed,
            center_tol=self.center_tol,
            center_max_iters=self.center_max_iters,
            threads=self.threads,
        )


@dataclass(frozen=True)
class FitHistory:
    """Distortion trace of the winning fit."""

    distortions: tuple[float, ...]
    iterations: int
    restart: int = 0
    restart_distortions: tuple[float, ...] = field(default_factory=tuple)

    @property
    def final_distortion(self) -> float:
        return self.distortions[-1]

    def is_non_increasing(self) -> bool:
        values = np.asarray(self.distortions)
        return bool(np.all(np.diff(values) <= 0))


def representative_points(ds: MultiDataset, spec: DistortionSpec) -> np.ndarray:
    """b_i = argmin_u sum_l lambda_l ||u - y_{l,i}||^r for every sample, shape (m, d)."""
    spec.check_dataset(ds)
    obs = ds.observations
    if ds.L == 1:
        return obs[:, 0, :].copy()
    if spec.r == 2:
        return weighted_average(ds, spec)
    if ds.L == 2 and spec.r > 1:
        lam1, lam2 = spec.weights
        centers, _ = lemma1_centers(obs[:, 0, :], obs[:, 1, :], lam2 / lam1, spec.r)
        return centers
    return np.stack([center_general(obs[i : i + 1], spec).center for i in range(ds.m)])


def _representative_costs(ds: MultiDataset, spec: DistortionSpec, reps: np.ndarray) -> np.ndarray:
    """Cost of every sample at its own representative."""
    diff = ds.observations - reps[:, None, :]
    sq = np.sum(diff**2, axis=2)
    powered = sq if spec.r == 2 else sq ** (spec.r / 2.0)
    return powered @ spec.weight_array


def _excess_costs(
    ds: MultiDataset,
    spec: DistortionSpec,
    center: np.ndarray,
    reps: np.ndarray,
    floor: np.ndarray,
) -> np.ndarray:
    """cost(center, s_i) - cost(b_i, s_i); exactly c1 * ||center - z_i||^2 when r = 2."""
    if spec.r == 2:
        return spec.c1 * np.sum((reps - center) ** 2, axis=1)
    costs = cost_matrix(center[None, :], ds, spec)[:, 0]
    return np.maximum(costs - floor, 0.0)


def init_codebook(ds: MultiDataset, spec: DistortionSpec, opts: FitOptions) -> Codebook:
    """Distance-weighted seeding over representative points.

    The first center is a uniformly drawn representative; each further one
    is drawn with probability proportional to the sample's current excess
    cost over its own optimum. Fully determined by ``opts.seed``.
    """
    if opts.n > ds.m:
        raise TooManyCenters(f"n={opts.n} centers requested for m={ds.m} samples")
    spec.check_dataset(ds)
    rng = np.random.default_rng(opts.seed)
    reps = representative_points(ds, spec)
    floor = np.zeros(ds.m) if spec.r == 2 else _representative_costs(ds, spec, reps)

    chosen = [int(rng.integers(ds.m))]
    current = _excess_costs(ds, spec, reps[chosen[0]], reps, floor)
    available = np.ones(ds.m, dtype=bool)
    available[chosen[0]] = False
    for _ in range(1, opts.n):
        weights = np.where(available, current, 0.0)
        cumulative = np.cumsum(weights)
        total = cumulative[-1]
        if total > 0:
            index = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
            index = min(index, ds.m - 1)
        else:
            # Every remaining sample is already served at its optimum
            candidates = np.flatnonzero(available)
            index = int(candidates[rng.integers(candidates.size)])
        chosen.append(index)
        available[index] = False
        current = np.minimum(current, _excess_costs(ds, spec, reps[index], reps, floor))

    return Codebook(reps[chosen].copy())


def _solve_center(
    obs: np.ndarray,
    spec: DistortionSpec,
    start: np.ndarray,
    opts: FitOptions,
) -> np.ndarray:
    if spec.r == 2:
        return center_r2(obs, spec).center
    return center_general(
        obs,
        spec,
        tol=opts.center_tol,
        max_iters=opts.center_max_iters,
        start=start,
    ).center


def _repair_empty_cells(
    centers: np.ndarray,
    assignment: CellAssignment,
    ds: MultiDataset,
    spec: DistortionSpec,
    reps: np.ndarray,
) -> tuple[np.ndarray, CellAssignment]:
    """Move each empty center onto the representative of the costliest sample.

    Only samples from cells holding at least two samples are eligible, so
    no repair empties another cell by itself. Moving a center onto b_i
    cannot raise sample i's cost, hence the distortion cannot increase.
    """
    n = centers.shape[0]
    for _ in range(n):
        sizes = assignment.cell_sizes(n)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            break
        eligible = sizes[assignment.labels] >= 2
        if not np.any(eligible):
            break
        costs = np.where(eligible, assignment.per_sample_cost, -np.inf)
        worst = int(np.argmax(costs))
        target = int(empty[0])
        debug_fit("relocating empty center", center=target, sample=worst)
        centers = centers.copy()
        centers[target] = reps[worst]
        assignment = assign(Codebook(centers), ds, spec)
    return centers, assignment


def fit(
    ds: MultiDataset,
    spec: DistortionSpec,
    opts: FitOptions,
    init: Optional[Codebook] = None,
) -> tuple[Codebook, FitHistory]:
    """Alternate center updates and generalized Voronoi assignment.

    Stops when the relative distortion decrease falls below ``opts.rel_tol``
    or after ``opts.max_iters`` iterations.
    """
    if opts.n > ds.m:
        raise TooManyCenters(f"n={opts.n} centers requested for m={ds.m} samples")
    spec.check_dataset(ds)
    reps = representative_points(ds, spec)
    codebook = init if init is not None else init_codebook(ds, spec, opts)
    if codebook.n != opts.n:
        raise InvalidParameter(f"initial codebook has {codebook.n} centers, expected {opts.n}")

    centers = np.array(codebook.centers, dtype=float)
    assignment = assign(Codebook(centers), ds, spec)
    centers, assignment = _repair_empty_cells(centers, assignment, ds, spec, reps)
    distortion = assignment.distortion
    history = [distortion]
    iterations = 0

    for iterations in range(1, opts.max_iters + 1):
        # Center step: accept a new center only if its cell cost does not rise
        new_centers = centers.copy()
        for k in range(opts.n):
            members = assignment.labels == k
            if not np.any(members):
                continue
            cell = ds.observations[members]
            candidate = _solve_center(cell, spec, centers[k], opts)
            if cell_objective(candidate, cell, spec) <= cell_objective(centers[k], cell, spec):
                new_centers[k] = candidate

        # Assignment step
        new_assignment = assign(Codebook(new_centers), ds, spec)
        new_centers, new_assignment = _repair_empty_cells(
            new_centers, new_assignment, ds, spec, reps
        )
        new_distortion = new_assignment.distortion
        if new_distortion > distortion:
            # Rounding noise at a fixed point; keep the previous state
            debug_fit("distortion rose by rounding, stopping", iteration=iterations)
            break

        decrease = distortion - new_distortion
        centers, assignment, distortion = new_centers, new_assignment, new_distortion
        history.append(distortion)
        debug_fit("iteration", iteration=iterations, distortion=distortion)
        if distortion == 0 or decrease <= opts.rel_tol * history[-2]:
            break

    info = FitInfo(distortion=distortion, iterations=iterations, seed=opts.seed)
    return Codebook(centers, info), FitHistory(distortions=tuple(history), iterations=iterations)


def fit_multistart(
    ds: MultiDataset,
    spec: DistortionSpec,
    opts: FitOptions,
) -> tuple[Codebook, FitHistory]:
    """Run ``opts.restarts`` fits with seeds seed, seed+1, ... and keep the best.

    Restarts may run concurrently; the winner is the lowest final
    distortion, ties broken by restart index, so the result does not depend
    on the worker count.
    """
    if opts.n > ds.m:
        raise TooManyCenters(f"n={opts.n} centers requested for m={ds.m} samples")

    def run(j: int) -> tuple[Codebook, FitHistory]:
        return fit(ds, spec, opts.with_seed(opts.seed + j))

    workers = max(1, min(opts.threads or 1, opts.restarts))
    if workers == 1:
        results = [run(j) for j in range(opts.restarts)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(opts.restarts)))

    finals = tuple(history.final_distortion for _, history in results)
    winner = min(range(len(results)), key=lambda j: (finals[j], j))
    codebook, history = results[winner]
    debug_fit("multistart finished", winner=winner, distortion=finals[winner])
    info = FitInfo(
        distortion=history.final_distortion,
        iterations=history.iterations,
        seed=(opts.seed + winner) & _SEED_MASK,
        restart=winner,
    )
    return Codebook(codebook.centers, info), FitHistory(
        distortions=history.distortions,
        iterations=history.iterations,
        restart=winner,
        restart_distortions=finals,
    )
