"""Experiment configuration files (JSON with a versioned ``schema`` field)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Union

from multiquant.core.model import DistortionSpec
from multiquant.experiments.datasets import Column, NoiseKind, NoiseSpec
from multiquant.utils.constants import (
    DEFAULT_GRID_SIZE,
    DEFAULT_RESTARTS,
    DEFAULT_TRIALS,
    Schema,
)
from multiquant.utils.exceptions import ConfigError, MultiquantError


@dataclass(frozen=True)
class ExperimentConfig:
    """Noisy multi-observation clustering experiment."""

    dataset: Path
    noise: NoiseSpec
    n_values: tuple[int, ...]
    r: float = 2.0
    weights: Optional[tuple[float, ...]] = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    standardize: bool = False
    columns: Optional[tuple[Column, ...]] = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.n_values:
            raise ConfigError("the sweep over n must not be empty")
        if any(n < 1 for n in self.n_values):
            raise ConfigError(f"center counts must be >= 1, got {list(self.n_values)}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.weights is not None and len(self.weights) != self.noise.L:
            raise ConfigError(
                f"{len(self.weights)} weights given for L={self.noise.L} observations"
            )
        if self.spec.L != self.noise.L:
            raise ConfigError(f"distortion covers {self.spec.L} observations, noise {self.noise.L}")

    @property
    def spec(self) -> DistortionSpec:
        if self.weights is None:
            return DistortionSpec.equal(self.noise.L, self.r)
        return DistortionSpec(r=self.r, weights=self.weights)


@dataclass(frozen=True)
class HighresConfig:
    """Numerical vs analytical quantizers for a pair of iid uniform sources on [0, 1]."""

    r: float
    lambdas: tuple[float, ...]
    n_values: tuple[int, ...]
    m: int
    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    grid_size: int = DEFAULT_GRID_SIZE

    def __post_init__(self) -> None:
        if not self.r > 1:
            raise ConfigError(f"r must exceed 1 for the two-source analysis, got {self.r}")
        if not self.lambdas or any(not lam > 0 for lam in self.lambdas):
            raise ConfigError(f"lambdas must be a nonempty list of positive weights, got {list(self.lambdas)}")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("center counts must be a nonempty list of positive integers")
        if self.m < max(self.n_values):
            raise ConfigError(f"m={self.m} samples cannot support n={max(self.n_values)} centers")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if self.grid_size < 3:
            raise ConfigError(f"grid_size must be >= 3, got {self.grid_size}")

    def spec(self, lambda2: float) -> DistortionSpec:
        return DistortionSpec(r=self.r, weights=(1.0, float(lambda2)))


def _read(path: Path, schema: str) -> dict[str, Any]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object at the top level")
    found = data.get("schema")
    if found != schema:
        raise ConfigError(f"{path}: schema is {found!r}, expected {schema!r}")
    return data


def _require(data: dict[str, Any], key: str, path: Path) -> Any:
    if key not in data:
        raise ConfigError(f"{path}: missing required field {key!r}")
    return data[key]


def _int_list(value: Any, key: str, path: Path) -> tuple[int, ...]:
    values = value if isinstance(value, list) else [value]
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"{path}: {key!r} must be an integer or a list of integers")
    return tuple(values)


def _float_list(value: Any, key: str, path: Path) -> tuple[float, ...]:
    values = value if isinstance(value, list) else [value]
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {key!r} must be a number or a list of numbers") from e


def load_noisy_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load a noisy-clustering experiment.

    Example::

        {
          "schema": "multiquant.experiment-noisy/1",
          "dataset": "iris.csv",
          "columns": [0, 1, 2, 3],
          "standardize": false,
          "noise": {"kind": "gaussian", "parameter": 4.0, "L": 4},
          "n": [2, 3, 4, 5],
          "r": 2,
          "trials": 200,
          "seed": 7
        }

    The dataset path is resolved relative to the config file.
    """
    path = Path(path)
    data = _read(path, Schema.NOISY_CONFIG)
    noise = _require(data, "noise", path)
    if not isinstance(noise, dict):
        raise ConfigError(f"{path}: 'noise' must be an object")
    seed = int(data.get("seed", 0))
    dataset = Path(_require(data, "dataset", path))
    if not dataset.is_absolute():
        dataset = path.parent / dataset
    columns = data.get("columns")
    weights = data.get("weights")
    try:
        noise_spec = NoiseSpec(
            kind=NoiseKind(_require(noise, "kind", path)),
            parameter=float(_require(noise, "parameter", path)),
            L=int(_require(noise, "L", path)),
            seed=seed,
        )
        return ExperimentConfig(
            dataset=dataset,
            noise=noise_spec,
            n_values=_int_list(_require(data, "n", path), "n", path),
            r=float(data.get("r", 2.0)),
            weights=_float_list(weights, "weights", path) if weights is not None else None,
            trials=int(data.get("trials", DEFAULT_TRIALS)),
            seed=seed,
            restarts=int(data.get("restarts", DEFAULT_RESTARTS)),
            standardize=bool(data.get("standardize", False)),
            columns=tuple(columns) if columns is not None else None,
        )
    except ConfigError:
        raise
    except (MultiquantError, TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


def load_highres_config(path: Union[str, Path]) -> HighresConfig:
    """Load a high-resolution comparison.

    Example::

        {
          "schema": "multiquant.experiment-highres/1",
          "r": 3,
          "lambdas": [1, 2, 3, 4, 5],
          "n": [4],
          "m": 200000,
          "seed": 1
        }
    """
    path = Path(path)
    data = _read(path, Schema.HIGHRES_CONFIG)
    try:
        return HighresConfig(
            r=float(_require(data, "r", path)),
            lambdas=_float_list(_require(data, "lambdas", path), "lambdas", path),
            n_values=_int_list(_require(data, "n", path), "n", path),
            m=int(_require(data, "m", path)),
            seed=int(data.get("seed", 0)),
            restarts=int(data.get("restarts", DEFAULT_RESTARTS)),
            grid_size=int(data.get("grid_size", DEFAULT_GRID_SIZE)),
        )
    except ConfigError:
        raise
    except (MultiquantError, TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e
