"""
Pipeline Errors
Every failure the pipeline reports on purpose carries a human-readable detail
and the process exit code the CLI maps it to.
"""

from typing import List, Optional, Tuple

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class PipelineError(Exception):
    """Base class for reported pipeline failures."""

    exit_code: int = EXIT_RUNTIME

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidParameterError(PipelineError, ValueError):
    """A caller supplied a value outside the operation's domain."""


class RecordingFormatError(PipelineError, ValueError):
    """A recording file or sidecar could not be parsed."""

    def __init__(self, detail: str, path: Optional[str] = None,
                 row: Optional[int] = None, column: Optional[int] = None):
        location = []
        if path is not None:
            location.append(str(path))
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        message = f"{detail} ({', '.join(location)})" if location else detail
        super().__init__(message)
        self.path = path
        self.row = row
        self.column = column


class UnstableModelError(PipelineError, ValueError):
    """Autoregressive coefficients whose companion matrix is not stable."""

    def __init__(self, spectral_radius: float, detail: Optional[str] = None):
        super().__init__(
            detail or f"unstable VAR coefficients: spectral radius {spectral_radius:.6f} >= 1"
        )
        self.spectral_radius = spectral_radius


class DegenerateDataError(PipelineError, ValueError):
    """Data that cannot support the requested estimate (constant channel, one class, ...)."""


class SchemaMismatchError(PipelineError, ValueError):
    """Two values that must share a schema (channels, features, grids) do not."""


class ConfigValidationError(PipelineError):
    """One or more run-configuration violations, each with a field pointer."""

    exit_code = EXIT_VALIDATION

    def __init__(self, issues: List[Tuple[str, str]]):
        self.issues = issues
        lines = [f"{field}: {message}" for field, message in issues]
        super().__init__("invalid run configuration:\n  " + "\n  ".join(lines))
