class InvalidInputError(ValueError):
    """Raised when an operation receives malformed or incompatible input."""


class UndefinedMetricError(ValueError):
    """Raised when a metric has no meaningful value (e.g. silent reference)."""
