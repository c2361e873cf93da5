"""multiquant - clustering noisy multi-observation data to common centers."""

from importlib.metadata import version

__version__ = version("multiquant")

from multiquant.core.lloyd import FitHistory, FitOptions, fit, fit_multistart
from multiquant.core.metrics import ami, ari
from multiquant.core.model import (
    Codebook,
    DistortionSpec,
    MultiDataset,
    Partition,
    concat_view,
    validate_multidataset,
)
from multiquant.core.quantizer import assign, empirical_distortion

__all__ = [
    "Codebook",
    "DistortionSpec",
    "FitHistory",
    "FitOptions",
    "MultiDataset",
    "Partition",
    "ami",
    "ari",
    "assign",
    "concat_view",
    "empirical_distortion",
    "fit",
    "fit_multistart",
    "validate_multidataset",
]
