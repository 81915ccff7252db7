"""Exception hierarchy shared by the pipeline stages."""


class MortexError(Exception):
    """Base class for all package errors."""


class GeometryError(MortexError, ValueError):
    """Invalid or unsupported geometry (orientation, self-intersection, ...)."""


class OutsideElementError(GeometryError):
    """A physical point does not lie in the element it was mapped into."""


class NonConvergenceError(MortexError, RuntimeError):
    """An iterative procedure (Newton inverse map) failed to converge."""


class SolverError(MortexError, RuntimeError):
    """Singular or failed linear solve."""


class ConfigError(MortexError, ValueError):
    """Malformed run configuration."""
