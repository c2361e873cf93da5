"""High-resolution asymptotics: constants, B(z), predictions and point densities."""

from multiquant.core.highres.density import (
    DensityKind,
    DensityModel,
    load_density_csv,
    weighted_average_density,
)
from multiquant.core.highres.pointdensity import (
    PointDensity,
    inverse_transform_codebook,
    optimal_point_density,
)
from multiquant.core.highres.theory import (
    BMatrix,
    HighResConstants,
    bz_numeric,
    density_pnorm,
    expected_pair_moment,
    general_constants,
    kappa_const,
    pair_moment,
    r2_constants,
    theorem1_predict,
    theorem2_predict,
)
from multiquant.core.highres.uniform import (
    example2_bz,
    example2_norm_constant,
    example2_point_density,
    example2_predict,
)

__all__ = [
    "BMatrix",
    "DensityKind",
    "DensityModel",
    "HighResConstants",
    "PointDensity",
    "bz_numeric",
    "density_pnorm",
    "example2_bz",
    "example2_norm_constant",
    "example2_point_density",
    "example2_predict",
    "expected_pair_moment",
    "general_constants",
    "inverse_transform_codebook",
    "kappa_const",
    "load_density_csv",
    "optimal_point_density",
    "pair_moment",
    "r2_constants",
    "theorem1_predict",
    "theorem2_predict",
    "weighted_average_density",
]
