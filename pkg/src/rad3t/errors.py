"""Exception types shared across the package."""


class Rad3tError(Exception):
    """Base class for all package errors."""


class ConfigurationError(Rad3tError):
    """Invalid scenario, grid, or solver configuration."""


class SolverError(Rad3tError):
    """Numerical failure inside a solver (non-convergence, inadmissible state)."""
