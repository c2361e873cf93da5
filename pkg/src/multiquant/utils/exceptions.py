"""Custom exceptions for multiquant."""

from multiquant.utils.constants import ExitCode


class MultiquantError(Exception):
    """Base exception for all multiquant errors.

    All multiquant-specific exceptions inherit from this class, allowing
    callers to catch all multiquant errors with a single except clause.
    The CLI maps ``exit_code`` to the process exit status.
    """

    exit_code = ExitCode.DATA_ERROR


class UsageError(MultiquantError):
    """Invalid parameters supplied by the caller."""

    exit_code = ExitCode.USAGE_ERROR


class InvalidPower(UsageError):
    """Distortion power outside the supported range."""


class InvalidParameter(UsageError):
    """A parameter violates its documented range."""


class TooManyCenters(UsageError):
    """More centers requested than there are samples."""


class DataError(MultiquantError):
    """Input data is malformed or inconsistent."""

    exit_code = ExitCode.DATA_ERROR


class EmptyDataset(DataError):
    """Dataset has no samples."""


class DimensionMismatch(DataError):
    """Observation or center dimensions disagree."""


class NonFinite(DataError):
    """A NaN or infinite coordinate was found."""


class EmptyCell(DataError):
    """A center update was requested for a cell with no samples."""


class LengthMismatch(DataError):
    """Two partitions cover different numbers of samples."""


class ParseError(DataError):
    """A file could not be parsed."""


class RaggedRows(DataError):
    """CSV rows have different numbers of columns."""


class ZeroVariance(DataError):
    """A column has zero sample variance and cannot be standardized."""


class ConfigError(DataError):
    """An experiment configuration file is invalid."""


class NumericalError(MultiquantError):
    """A numerical routine failed."""

    exit_code = ExitCode.NUMERICAL_ERROR


class UnknownConstant(NumericalError):
    """The optimal quantizer constant is unknown in this dimension."""


class QuadratureFailure(NumericalError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NoConvergence(NumericalError):
    """An iterative solver exhausted its iteration budget.

    The best iterate is attached as ``solution``.
    """

    def __init__(self, message: str, solution: object = None) -> None:
        super().__init__(message)
        self.solution = solution
