"""Monte Carlo comparison of ordinary and multi-observation clustering.

Each trial draws fresh observation noise around the clean data, then
clusters it twice: "ordinary" runs squared-error k-means on the concatenated
L*d-dimensional noisy vectors, "proposed" fits common d-dimensional centers
under the weighted distortion. Both partitions are scored against the
clustering of the clean data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from multiquant.core.lloyd import FitOptions, fit_multistart
from multiquant.core.metrics import ami, ari
from multiquant.core.model import DistortionSpec, MultiDataset, Partition, concat_view
from multiquant.core.quantizer import assign
from multiquant.experiments.configs import ExperimentConfig
from multiquant.experiments.datasets import (
    ground_truth_partition,
    inject_noise,
    load_csv,
    standardize,
)
from multiquant.experiments.results import METRICS, ExperimentResult, ResultRow, summarize
from multiquant.experiments.rng import make_streams
from multiquant.utils.constants import CI_Z, Method
from multiquant.utils.debug import debug_experiment


@dataclass(frozen=True)
class TrialScores:
    """Scores of one trial, keyed by (method, n) with values (ari, ami, distortion)."""

    trial: int
    scores: dict[tuple[str, int], tuple[float, float, float]]


def _cluster(
    ds: MultiDataset,
    spec: DistortionSpec,
    n: int,
    seed: int,
    restarts: int,
) -> tuple[Partition, float]:
    opts = FitOptions(n=n, restarts=restarts, seed=seed)
    codebook, history = fit_multistart(ds, spec, opts)
    return Partition(assign(codebook, ds, spec).labels, n), history.final_distortion


def run_trial(
    clean: np.ndarray,
    truths: dict[int, Partition],
    cfg: ExperimentConfig,
    trial: int,
) -> TrialScores:
    """One noise draw scored for every n of the sweep."""
    streams = make_streams(cfg.seed, trial)
    noisy = inject_noise(clean, cfg.noise, rng=streams.noise)
    flat = MultiDataset(concat_view(noisy)[:, None, :])
    ordinary_spec = DistortionSpec.equal(1, 2.0)

    scores: dict[tuple[str, int], tuple[float, float, float]] = {}
    for n in cfg.n_values:
        truth = truths[n]
        for method, ds, spec in (
            (Method.ORDINARY, flat, ordinary_spec),
            (Method.PROPOSED, noisy, cfg.spec),
        ):
            partition, distortion = _cluster(ds, spec, n, streams.fit_seed, cfg.restarts)
            scores[(method, n)] = (ari(partition, truth), ami(partition, truth), distortion)
    debug_experiment("trial finished", trial=trial)
    return TrialScores(trial=trial, scores=scores)


def load_clean_data(cfg: ExperimentConfig) -> np.ndarray:
    clean = load_csv(cfg.dataset, cfg.columns)
    return standardize(clean) if cfg.standardize else clean


def run_noisy_experiment(
    cfg: ExperimentConfig,
    threads: Optional[int] = 1,
    clean: Optional[np.ndarray] = None,
) -> ExperimentResult:
    """Run ``cfg.trials`` trials and aggregate them in trial order.

    Trials may run concurrently; every trial draws from its own streams so
    the result is identical for any worker count. ``clean`` overrides the
    dataset named in the config.
    """
    if clean is None:
        clean = load_clean_data(cfg)
    clean = np.asarray(clean, dtype=float)
    truths = {
        n: ground_truth_partition(clean, n, cfg.seed, threads=threads or 1)
        for n in cfg.n_values
    }
    debug_experiment(
        "noisy experiment started",
        m=clean.shape[0],
        d=clean.shape[1],
        L=cfg.noise.L,
        trials=cfg.trials,
    )

    def run(trial: int) -> TrialScores:
        return run_trial(clean, truths, cfg, trial)

    workers = max(1, min(threads or 1, cfg.trials))
    if workers == 1:
        outcomes = [run(t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(cfg.trials)))

    rows = []
    for method in (Method.ORDINARY, Method.PROPOSED):
        for n in cfg.n_values:
            table = np.array([outcome.scores[(method, n)] for outcome in outcomes])
            for k, metric in enumerate(METRICS):
                mean, half = summarize(table[:, k], CI_Z)
                rows.append(ResultRow(method=method, n=n, metric=metric, mean=mean, ci_half=half))

    metadata = {
        "dataset": cfg.dataset.name,
        "noise": cfg.noise.kind.value,
        "noise_parameter": cfg.noise.parameter,
        "L": cfg.noise.L,
        "r": cfg.r,
        "weights": list(cfg.spec.weights),
        "standardize": cfg.standardize,
        "restarts": cfg.restarts,
    }
    return ExperimentResult(rows=tuple(rows), trials=cfg.trials, seed=cfg.seed, metadata=metadata)
