"""Exception hierarchy shared by the library and the CLI.

Every class carries the process exit code the CLI uses when the error
escapes a subcommand.
"""

from typing import Optional


class RadarDetectionError(Exception):
    """Base class for all errors raised by the package."""

    exit_code: int = 1


class ConfigError(RadarDetectionError):
    """Invalid settings or run configuration."""

    exit_code = 2


class DomainError(RadarDetectionError, ValueError):
    """Scalar argument outside its admissible range."""

    exit_code = 2


class DimensionMismatch(RadarDetectionError, ValueError):
    """Shapes of vectors, matrices, datasets or networks disagree."""

    exit_code = 5


class NonPositiveDefinite(RadarDetectionError):
    """Cholesky factorization met a pivot at or below the PD threshold."""


class ZeroObservation(RadarDetectionError):
    """A normalized statistic was asked to score the zero vector."""


class EmptySecondaryData(RadarDetectionError):
    """A covariance estimator received no secondary vectors."""


class InsufficientSecondaryData(RadarDetectionError):
    """Fewer secondary vectors than the dimension (K < N)."""


class DegenerateSample(RadarDetectionError):
    """A secondary vector is exactly zero."""


class EmptyInput(RadarDetectionError):
    """Empty batch, score list or validation set."""


class NotConverged(RadarDetectionError):
    """Fixed-point iteration exhausted its iteration budget."""

    exit_code = 6

    def __init__(
        self,
        message: str,
        iterations: int = 0,
        residual: float = float("nan"),
        trial: Optional[int] = None,
    ):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.trial = trial


class MissingInput(RadarDetectionError):
    """A pipeline stage ran before the artifacts it depends on exist."""

    exit_code = 4


class DatasetFormatError(RadarDetectionError):
    """Malformed RFD1 dataset file or sidecar."""

    exit_code = 3


class CheckpointFormatError(RadarDetectionError):
    """Malformed or truncated RFN1 checkpoint."""

    exit_code = 3


class CheckpointVersionError(CheckpointFormatError):
    """Checkpoint written by an unsupported format version."""


class CheckpointDigestError(CheckpointFormatError):
    """Checkpoint payload does not match its stored checksum."""


class ArchitectureMismatch(RadarDetectionError):
    """Checkpoint architecture differs from the requested one."""

    exit_code = 5


def exit_code_for(error: BaseException) -> int:
    """Process exit code for an exception escaping a CLI subcommand."""
    if isinstance(error, RadarDetectionError):
        return error.exit_code
    if isinstance(error, OSError):
        return 3
    return 1
