"""Helper functions for CLI - file formats, flag parsing, config resolution."""

import json
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from multiquant.core.lloyd import FitHistory, FitOptions
from multiquant.core.model import Codebook, DistortionSpec, FitInfo, MultiDataset, Partition
from multiquant.experiments.datasets import load_csv
from multiquant.utils.config import Config, get_multiquant_dir
from multiquant.utils.constants import Schema
from multiquant.utils.exceptions import InvalidParameter, ParseError, UsageError
from multiquant.utils.formatting import render_csv


def load_config() -> Config:
    """Effective configuration (file, then MULTIQUANT_* environment)."""
    return Config(get_multiquant_dir())


def parse_weights(text: Optional[str], L: int) -> tuple[float, ...]:
    """Comma-separated weights; omitted means L unit weights."""
    if text is None or not text.strip():
        return (1.0,) * L
    try:
        weights = tuple(float(part) for part in text.split(","))
    except ValueError as e:
        raise InvalidParameter(f"weights must be comma-separated numbers, got {text!r}") from e
    if len(weights) != L:
        raise InvalidParameter(f"{len(weights)} weights given for L={L}")
    return weights


def build_spec(r: float, weights: Optional[str], L: int) -> DistortionSpec:
    if L < 1:
        raise InvalidParameter(f"L must be >= 1, got {L}")
    return DistortionSpec(r=r, weights=parse_weights(weights, L))


def fit_options(
    config: Config,
    n: int,
    seed: int,
    restarts: Optional[int] = None,
    max_iters: Optional[int] = None,
    rel_tol: Optional[float] = None,
    threads: Optional[int] = None,
) -> FitOptions:
    """Flags first, then configuration values."""
    return FitOptions(
        n=n,
        max_iters=max_iters if max_iters is not None else int(config.max_iters),
        rel_tol=rel_tol if rel_tol is not None else float(config.rel_tol),
        restarts=restarts if restarts is not None else int(config.restarts),
        seed=seed,
        center_tol=float(config.center_tol),
        center_max_iters=int(config.center_max_iters),
        threads=config.effective_threads(threads),
    )


def load_multidataset(path: Path, L: int) -> MultiDataset:
    """Dataset CSV whose rows hold the L observations side by side."""
    return MultiDataset.from_concat(load_csv(path), L)


def codebook_to_dict(codebook: Codebook, spec: DistortionSpec) -> dict[str, Any]:
    data: dict[str, Any] = {
        "schema": Schema.CODEBOOK,
        "r": spec.r,
        "weights": list(spec.weights),
        "n": codebook.n,
        "d": codebook.d,
        "centers": codebook.centers,
    }
    if codebook.fit_info is not None:
        info = codebook.fit_info
        data["fit"] = {
            "distortion": info.distortion,
            "iterations": info.iterations,
            "seed": info.seed,
            "restart": info.restart,
        }
    return data


def read_codebook(path: Path) -> tuple[Codebook, Optional[DistortionSpec]]:
    """Codebook and, when recorded, the distortion it was fitted for."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict) or data.get("schema") != Schema.CODEBOOK:
        raise ParseError(f"{path} is not a {Schema.CODEBOOK} file")
    if "centers" not in data:
        raise ParseError(f"{path} has no centers")
    try:
        info = None
        if isinstance(data.get("fit"), dict):
            fit = data["fit"]
            info = FitInfo(
                distortion=float(fit["distortion"]),
                iterations=int(fit["iterations"]),
                seed=fit.get("seed"),
                restart=fit.get("restart"),
            )
        spec = None
        if "r" in data and "weights" in data:
            spec = DistortionSpec(r=float(data["r"]), weights=tuple(data["weights"]))
        centers = np.asarray(data["centers"], dtype=float)
    except (KeyError, TypeError, ValueError, UsageError) as e:
        raise ParseError(f"{path}: malformed codebook: {e}") from e
    return Codebook(centers, info), spec


def history_csv(history: FitHistory) -> str:
    return render_csv(("iteration", "distortion"), enumerate(history.distortions))


def labels_csv(partition: Partition) -> str:
    return render_csv(("index", "label"), enumerate(partition.labels.tolist()))


def read_labels(path: Path) -> Partition:
    """Labels from the last column of a CSV (an ``index,label`` file or a bare column)."""
    table = load_csv(path)
    labels = table[:, -1]
    if not np.all(np.equal(np.mod(labels, 1), 0)):
        raise ParseError(f"{path}: labels must be integers")
    return Partition(labels.astype(np.int64))


def ensure_distinct(paths: Sequence[Optional[Path]]) -> None:
    """Refuse to write two outputs to the same file."""
    seen = [Path(p).resolve() for p in paths if p is not None]
    if len(seen) != len(set(seen)):
        raise InvalidParameter("output paths must be distinct")
