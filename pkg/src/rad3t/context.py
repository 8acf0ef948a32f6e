"""Per-run solver context: grid, physics, boundaries, and split weights."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .grid import BoundarySpec, Grid1D
from .physics import PhysicalParams, SourceSpec, opacity
from .spatial import required_ghost_width


@dataclass(frozen=True)
class SplitWeights:
    """Fractions of the radiation-electron and electron-ion couplings.

    The conservative split assigns half of each interaction term to both
    subsystems; the naive comparison split gives the full radiation coupling
    to the transport part and the full ion coupling to the macroscopic part.
    """

    sigma: float
    kappa: float


AP_WEIGHTS = (SplitWeights(0.5, 0.5), SplitWeights(0.5, 0.5))
NAIVE_WEIGHTS = (SplitWeights(1.0, 0.0), SplitWeights(0.0, 1.0))

_HALF_RANGE_CACHE: dict = {}


@dataclass(frozen=True)
class SolverContext:
    """Everything a split sub-solver needs besides the evolving state."""

    grid: Grid1D
    params: PhysicalParams
    bc: BoundarySpec
    reconstruction: str = "constant"
    micro_weights: SplitWeights = AP_WEIGHTS[0]
    macro_weights: SplitWeights = AP_WEIGHTS[1]
    sources: tuple[SourceSpec, ...] = ()

    def __post_init__(self):
        required_ghost_width(self.reconstruction)  # validates the mode name

    @property
    def dx(self) -> float:
        return self.grid.dx

    def centers(self) -> np.ndarray:
        return self.grid.centers()

    def sigma_cells(self, T_e: np.ndarray) -> np.ndarray:
        return opacity(self.grid.centers(), T_e, self.params.opacity_model)

    def sigma_ghosted(self, T_e_ghosted: np.ndarray, width: int) -> np.ndarray:
        return opacity(self.grid.ghosted_centers(width), T_e_ghosted, self.params.opacity_model)

    def material_lag(self, T_e: np.ndarray, T_i: np.ndarray):
        """Lagged heat capacities and coupling coefficient on cell centers."""
        x = self.grid.centers()
        C_ve = self.params.C_ve_model(x, T_e)
        C_vi = self.params.C_vi_model(x, T_i)
        kappa = self.params.kappa_model(x, T_e)
        return C_ve, C_vi, kappa

    def half_range_matrices(self, order: int):
        """Cached upwind flux matrices used at inflow boundaries."""
        cached = _HALF_RANGE_CACHE.get(order)
        if cached is None:
            from .angular import half_range_flux_matrices

            cached = half_range_flux_matrices(order)
            _HALF_RANGE_CACHE[order] = cached
        return cached


def weights_for_solver(kind: str) -> tuple[SplitWeights, SplitWeights]:
    if kind in ("pn", "sn", "diffusion_ref"):
        return AP_WEIGHTS
    if kind == "naive_split":
        return NAIVE_WEIGHTS
    raise ConfigurationError(f"unknown solver kind {kind!r}")
