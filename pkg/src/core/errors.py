"""
Exception hierarchy for the toolkit.

Every error is a ValueError so callers that only know about ValueError keep
working. The CLI turns these into process exit codes.
"""


class ToolkitError(ValueError):
    """Base class for contract violations raised by the toolkit."""

    exit_code = 3


class InputError(ToolkitError):
    """Missing or unusable input files."""

    exit_code = 2


class FormatError(InputError):
    """A file does not match its declared format."""


class ShapeError(ToolkitError):
    """Grids, tensors or parameter sets have incompatible dimensions."""


class CatalogError(ToolkitError):
    """Channel or class catalog lookups failed."""


class ConfigError(ToolkitError):
    """Invalid configuration value."""


class EmptySampleError(ToolkitError):
    """A statistic was requested over an empty sample."""


class CoverageError(ToolkitError):
    """A class required by an operation is absent."""


class LabelError(ToolkitError):
    """A label is outside the valid class range."""


class BatchSizeError(ToolkitError):
    """Batch is too small for batch statistics."""


class ModeError(ToolkitError):
    """Model is in the wrong mode (train/eval) for the operation."""


class CompatibilityError(ToolkitError):
    """Model variant or architecture does not match the request."""


class DataError(ToolkitError):
    """Dataset does not satisfy an operation's requirements."""


class NumericError(ToolkitError):
    """Non-finite values where finite ones are required."""


class OutOfNeighborhoodError(ToolkitError):
    """Pixel lacks the full 3x3 neighborhood."""
