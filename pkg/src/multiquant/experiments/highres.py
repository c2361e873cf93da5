"""Fitted vs analytical quantizers for two iid uniform sources on [0, 1]."""

from __future__ import annotations

from typing import Optional

import numpy as np

from multiquant.core.highres import (
    DensityModel,
    inverse_transform_codebook,
    optimal_point_density,
    theorem2_predict,
)
from multiquant.core.lloyd import FitOptions, fit_multistart
from multiquant.core.model import MultiDataset
from multiquant.core.quantizer import empirical_distortion
from multiquant.experiments.configs import HighresConfig
from multiquant.experiments.results import HighresResult, HighresRow
from multiquant.utils.debug import debug_experiment


def uniform_pairs(m: int, seed: int) -> MultiDataset:
    """m samples of two independent observations uniform on [0, 1]."""
    rng = np.random.default_rng(seed)
    return MultiDataset(rng.uniform(0.0, 1.0, size=(m, 2, 1)))


def run_highres_experiment(
    cfg: HighresConfig,
    threads: Optional[int] = 1,
) -> HighresResult:
    """Compare Lloyd fits with inverse-transform codebooks for every (lambda, n).

    All comparisons share one set of ``cfg.m`` pairs. Distortions of both
    codebooks are measured on those pairs; the prediction is the asymptotic
    formula for the same weights.
    """
    ds = uniform_pairs(cfg.m, cfg.seed)
    model = DensityModel.unit_uniform(L=2, d=1)
    rows = []
    for lambda2 in cfg.lambdas:
        spec = cfg.spec(lambda2)
        density = optimal_point_density(model, spec, grid_size=cfg.grid_size)
        for n in cfg.n_values:
            opts = FitOptions(n=n, restarts=cfg.restarts, seed=cfg.seed, threads=threads)
            fitted, history = fit_multistart(ds, spec, opts)
            numerical = fitted.sorted()
            analytical = inverse_transform_codebook(density, n)
            row = HighresRow(
                lambda2=float(lambda2),
                n=n,
                alpha=float(spec.alpha),
                numerical_centers=numerical.centers[:, 0].copy(),
                analytical_centers=analytical.centers[:, 0].copy(),
                empirical_distortion=history.final_distortion,
                analytical_distortion=empirical_distortion(analytical, ds, spec),
                predicted_distortion=theorem2_predict(model, spec, n),
                fit_distortions=history.distortions,
            )
            debug_experiment(
                "highres comparison",
                lambda2=lambda2,
                n=n,
                max_gap=row.max_center_gap,
                distortion_gap=row.distortion_gap,
            )
            rows.append(row)
    return HighresResult(rows=tuple(rows), r=cfg.r, m=cfg.m, seed=cfg.seed)
