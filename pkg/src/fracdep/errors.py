"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """An iterative numerical scheme exhausted its budget before converging."""


class NumericalError(RuntimeError):
    """A formula produced a value that signals breakdown (underflow, negative
    variance from cancellation) rather than a silently usable number."""


class ResourceCapError(RuntimeError):
    """A simulation exceeded its configured step/memory cap."""


class GridError(ValueError):
    """A requested time point is missing from a sample path's grid."""
