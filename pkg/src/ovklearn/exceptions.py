"""Exception types shared across the package."""


class OvkError(Exception):
    """Base class for all ovklearn errors."""


class DimensionMismatch(OvkError, ValueError):
    """Two objects that must share a dimension do not."""

    def __init__(self, what, left, right):
        super().__init__(f"{what}: dimensions differ ({left} vs {right})")
        self.left = left
        self.right = right


class ConfigError(OvkError, ValueError):
    """Invalid configuration (bad parameter value, malformed config key, ...)."""


class NumericsError(OvkError, RuntimeError):
    """Numerical failure: non-finite values or an unsolvable linear system."""


class HypothesisViolation(OvkError, ValueError):
    """A prerequisite inequality of a guarantee does not hold.

    The message names the failing inequality with its actual values.
    """


class DataError(OvkError, ValueError):
    """Malformed dataset file or inconsistent dataset contents."""
