"""Exception types raised across the package."""


class HiercastError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(HiercastError, ValueError):
    """An argument is out of its documented range."""


class ParseError(HiercastError):
    """A data file contains values that cannot be parsed."""


class FormatError(HiercastError):
    """A data file violates the expected layout."""


class MetadataError(HiercastError):
    """Hierarchy metadata is inconsistent with the panel."""


class ConfigError(HiercastError):
    """An experiment configuration is invalid."""


class FitError(HiercastError):
    """A model could not be fitted to a series."""


class DegenerateSeriesError(HiercastError):
    """A series has zero variance where variation is required."""


class DegenerateInputError(HiercastError):
    """An input matrix has no usable variation."""


class FeatureError(HiercastError):
    """A series is too short for feature extraction."""


class NumericalError(HiercastError):
    """A linear-algebra step failed (singular or ill-conditioned system)."""


class CoherenceError(HiercastError):
    """Forecasts violate the aggregation constraints they should satisfy."""


class ScaleError(HiercastError):
    """The scaled-error denominator is zero."""
