"""Exception hierarchy for the minar package."""


class MinarError(Exception):
    """Base class for all package errors."""


class DomainError(MinarError, ValueError):
    """A parameter lies outside its admissible domain."""


class DimensionError(MinarError, ValueError):
    """Array shapes or dimensions do not agree."""


class StationarityError(MinarError, ValueError):
    """The autoregressive matrix has spectral radius >= 1."""


class ConvergenceError(MinarError, ArithmeticError):
    """A numerical iteration failed to converge within its budget."""


class EstimationError(MinarError, ValueError):
    """The data cannot support the requested estimation."""
