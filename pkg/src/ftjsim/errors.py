"""Exception types shared across the simulator."""


class FtjError(Exception):
    """Base class for simulator errors."""


class InvalidStackError(FtjError):
    """Raised for non-physical layer stacks (zero/negative thickness, bad materials)."""


class SolverError(FtjError):
    """Raised when an iterative linear solve fails to reach the requested residual."""


class StiffnessError(FtjError):
    """Raised on time-step underflow in the LGD integrator."""


class DivergenceError(FtjError):
    """Raised when a polarization trajectory leaves the physical range."""


class ConvergenceError(FtjError):
    """Raised when the current quadrature window cannot be converged."""


class ConfigError(FtjError):
    """Raised for missing, unknown, or ill-typed configuration keys."""


class UndefinedMetricError(FtjError):
    """Raised when a metric is requested for an empty domain subset."""
