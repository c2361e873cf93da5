"""Experiment harness: datasets, noise injection and Monte Carlo runners."""

from multiquant.experiments.configs import (
    ExperimentConfig,
    HighresConfig,
    load_highres_config,
    load_noisy_config,
)
from multiquant.experiments.datasets import (
    NoiseKind,
    NoiseSpec,
    ground_truth_partition,
    inject_noise,
    load_csv,
    standardize,
)
from multiquant.experiments.highres import run_highres_experiment, uniform_pairs
from multiquant.experiments.noisy import run_noisy_experiment
from multiquant.experiments.results import (
    ExperimentResult,
    HighresResult,
    HighresRow,
    ResultRow,
    write_highres_csv,
    write_highres_json,
    write_result_csv,
    write_result_json,
)
from multiquant.experiments.rng import TrialStreams, make_streams

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "HighresConfig",
    "HighresResult",
    "HighresRow",
    "NoiseKind",
    "NoiseSpec",
    "ResultRow",
    "TrialStreams",
    "ground_truth_partition",
    "inject_noise",
    "load_csv",
    "load_highres_config",
    "load_noisy_config",
    "make_streams",
    "run_highres_experiment",
    "run_noisy_experiment",
    "standardize",
    "uniform_pairs",
    "write_highres_csv",
    "write_highres_json",
    "write_result_csv",
    "write_result_json",
]
