"""Exception hierarchy shared across the package."""


class DynradError(Exception):
    """Base class for all errors raised by dynrad."""


class ValidationError(DynradError, ValueError):
    """Invalid input shape, configuration or file content."""


class DimensionMismatch(ValidationError):
    pass


class EmptyRoi(ValidationError):
    pass


class NoPairs(DynradError):
    """A co-occurrence offset produced no in-mask voxel pairs."""


class NoNeighborhood(DynradError):
    """Every ROI voxel lacks in-mask neighbours (NGTDM undefined)."""


class UnderdeterminedFit(DynradError):
    """Fewer samples than model parameters."""


class FeatureExtractionError(DynradError):
    """Wraps an extractor failure with the offending time index."""

    def __init__(self, time_index: int, cause: Exception):
        self.time_index = time_index
        self.cause = cause
        super().__init__(f"timepoint {time_index}: {type(cause).__name__}: {cause}")


class SchemaMismatch(ValidationError):
    pass


class DegenerateSplit(ValidationError):
    """Class composition does not allow the requested split or folds."""
