"""Constants used throughout multiquant."""

# Lloyd iteration defaults
DEFAULT_MAX_ITERS = 500
DEFAULT_REL_TOL = 1e-9
DEFAULT_RESTARTS = 10

# Per-cell convex center solver
DEFAULT_CENTER_TOL = 1e-9
DEFAULT_CENTER_MAX_ITERS = 10_000
SMOOTHING_EPS = 1e-12

# Quadrature (absolute tolerance)
QUAD_ABS_TOL = 1e-8
QUAD_REL_TOL = 1e-10
QUAD_SUBDIVISIONS = 200
# A panel QUADPACK flags is only rejected above this error estimate
QUAD_FAILURE_TOL = 1e-6

# Point density tabulation
DEFAULT_GRID_SIZE = 1025

# Experiments
DEFAULT_TRIALS = 200
GROUND_TRUTH_RESTARTS = 10
CI_Z = 1.959963984540054  # two-sided 95% normal quantile

# Samples per block when evaluating cost matrices
CHUNK_SIZE = 4096

# Output formatting
FLOAT_FORMAT = ".17g"


class Schema:
    """Versioned schema identifiers for files we read and write."""

    CODEBOOK = "multiquant.codebook/1"
    NOISY_CONFIG = "multiquant.experiment-noisy/1"
    HIGHRES_CONFIG = "multiquant.experiment-highres/1"
    RESULT = "multiquant.result/1"
    ANALYSIS = "multiquant.analysis/1"


class ExitCode:
    """Process exit codes."""

    OK = 0
    USAGE_ERROR = 2
    DATA_ERROR = 3
    NUMERICAL_ERROR = 4


class Method:
    """Clustering methods compared by the noisy experiment."""

    ORDINARY = "ordinary"
    PROPOSED = "proposed"
