"""Exception types raised across the CPML package."""

from typing import Any, Dict, Optional


class CpmlError(Exception):
    """Base class for every error raised by cpml."""


class DataFormatError(CpmlError):
    """An input file does not match its schema."""

    def __init__(self,
                 message: str,
                 path: Optional[str] = None,
                 row: Optional[int] = None,
                 column: Optional[str] = None):
        self.path = path
        self.row = row
        self.column = column
        location = []
        if path is not None:
            location.append(f"file {path}")
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column {column}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(prefix + message)


class ConfigError(CpmlError):
    """The pipeline or generator configuration is invalid."""


class FeatureError(CpmlError):
    """Features cannot be computed from the given input."""


class PartitionError(CpmlError):
    """A dataset cannot be split or balanced as requested."""


class DimensionError(CpmlError):
    """An input row or matrix has the wrong number of features."""


class ModelFitError(CpmlError):
    """A model could not be fitted to the training data."""

    def __init__(self, message: str, achievable_components: Optional[int] = None):
        self.achievable_components = achievable_components
        super().__init__(message)


class ConvergenceError(ModelFitError):
    """An iterative solver hit its iteration budget."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = dict(diagnostics or {})
        details = ", ".join(f"{key}={value}" for key, value in self.diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)


class ArtifactMissingError(CpmlError):
    """An upstream stage output is not where the next stage expects it."""

    def __init__(self, path: str, stage: str):
        self.path = path
        self.stage = stage
        super().__init__(f"missing artifact {path} (run the '{stage}' stage first)")


class StageError(CpmlError):
    """A pipeline stage failed."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
