"""Exception types shared across the package."""


class UnsupportedDimensionError(ValueError):
    """Raised when a dimension or scale lies outside the supported range."""


class NotSamplableError(ValueError):
    """Raised for test functions that cannot be evaluated in real space."""


class ToleranceUnreachableError(ValueError):
    """Raised when a truncation tolerance cannot be met."""


class QuadratureError(RuntimeError):
    """Quadrature failed to converge within its budget.

    ``partial`` holds whatever per-term results were finished before the
    failure (a dict keyed like the breakdown of the result that was being
    built).
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = dict(partial or {})
