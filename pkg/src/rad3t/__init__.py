"""Asymptotic-preserving splitting solver for the 3T radiative transfer model."""

from .errors import ConfigurationError, Rad3tError, SolverError
from .integrator import RunResult, TimeControl, cfl_dt, run
from .scenarios import BUILTIN_NAMES, ScenarioConfig, builtin

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "ConfigurationError",
    "Rad3tError",
    "RunResult",
    "ScenarioConfig",
    "SolverError",
    "TimeControl",
    "builtin",
    "cfl_dt",
    "run",
    "__version__",
]
