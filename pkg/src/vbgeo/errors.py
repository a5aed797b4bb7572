"""Exception types shared across the package."""


class VbgeoError(Exception):
    """Base class for all package errors."""


class DomainError(VbgeoError, ValueError):
    """Evaluation requested outside a chart box or weight domain."""


class ParameterError(VbgeoError, ValueError):
    """Invalid construction parameters (profile, chart, bundle, scenario)."""


class ConvergenceError(VbgeoError, RuntimeError):
    """An iterative numerical procedure failed to settle."""


class ChartExitError(DomainError):
    """A base point left the coordinate box of its chart."""
