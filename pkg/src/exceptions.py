"""Exception hierarchy for the churn pipeline."""

from typing import Optional


class ChurnError(Exception):
    """Base class for every error raised by the pipeline."""


class DataError(ChurnError, ValueError):
    """Input data could not be read or violates the tabular contract."""


class RaggedRowError(DataError):
    """A CSV row has the wrong number of cells."""

    def __init__(self, row_index: int, expected: int, found: int):
        self.row_index = row_index
        self.expected = expected
        self.found = found
        super().__init__(
            f"ragged row {row_index}: expected {expected} cells, found {found}"
        )


class DuplicateColumnError(DataError):
    """Two header cells carry the same name."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"duplicate column name '{column}'")


class UnknownColumnError(ChurnError, KeyError):
    """A column was referenced that the frame does not have."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(column)

    def __str__(self) -> str:
        return f"unknown column '{self.column}'"


class SchemaError(ChurnError, ValueError):
    """Data does not match what a fitted plan expects."""

    def __init__(self, message: str, column: Optional[str] = None):
        self.column = column
        super().__init__(message)


class PlanError(ChurnError, ValueError):
    """A preprocessing plan cannot be fitted."""


class SplitError(ChurnError, ValueError):
    """A dataset cannot be split as requested."""


class ShapeError(ChurnError, ValueError):
    """Array dimensions or values do not fit the model."""


class StaleCacheError(ChurnError):
    """Backward pass was given a cache that does not belong to the current parameters."""


class DivergenceError(ChurnError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: Optional[str] = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}: non-finite loss")


class MetricError(ChurnError, ValueError):
    """Metric inputs are empty or inconsistent."""


class UndefinedRocError(MetricError):
    """ROC needs at least one positive and one negative label."""


class ArtifactError(ChurnError):
    """A saved model artifact cannot be parsed or fails verification."""


class UnsupportedVersionError(ArtifactError):
    """The artifact format version is not one this build reads."""

    def __init__(self, version: object, supported: int):
        self.version = version
        self.supported = supported
        super().__init__(
            f"unsupported artifact version {version!r} (this build reads version {supported})"
        )


class SweepError(ChurnError):
    """A hyperparameter sweep produced no usable model."""
