"""
Exception hierarchy.

Every error raised on purpose by the toolkit derives from HOIError, which is a
ValueError so callers catching ValueError keep working.
"""


class HOIError(ValueError):
    """Base class for all toolkit errors."""


class DistributionError(HOIError):
    """A probability table violates its invariants."""


class DegenerateMarginalError(DistributionError):
    """An empty variable subset was requested."""


class TableSizeError(DistributionError):
    """A joint table would exceed the configured state cap."""


class SystemSizeError(HOIError):
    """A quantity was requested on a system (or subset) of unsupported size."""


class ConstantColumnError(HOIError):
    """A data column cannot be rank-transformed because it is constant."""


class SingularCorrelationError(HOIError):
    """A correlation matrix (or one of its submatrices) is not positive definite."""


class BootstrapError(HOIError):
    """Too many bootstrap replicates failed."""


class DataFormatError(HOIError):
    """Input data could not be parsed or does not fit the requested backend."""


class FredAPIError(HOIError):
    """The FRED observations endpoint returned an error."""
