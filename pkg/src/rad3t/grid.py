"""1D uniform finite-volume grid, moment-state storage, and ghost cells."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .physics import PhysicalParams, radiation_density

#: ghost widths accepted by extend_with_ghosts
SUPPORTED_GHOST_WIDTHS = (1, 2)


@dataclass(frozen=True)
class Grid1D:
    """Uniform cells on [x_min, x_max]; centers at x_min + (j + 1/2) dx."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 4:
            raise ConfigurationError(f"grid needs at least 4 cells, got {self.n}")
        if self.x_max <= self.x_min:
            raise ConfigurationError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n) + 0.5) * self.dx

    def ghosted_centers(self, width: int) -> np.ndarray:
        return self.x_min + (np.arange(-width, self.n + width) + 0.5) * self.dx


@dataclass
class MomentState:
    """Cell-averaged Legendre moments psi_0..psi_M plus material temperatures.

    psi has shape (N, M+1); psi[:, 0] is 2*rho, so rho is derived, never stored
    twice.  Invariants: psi_0 >= 0, T_e > 0, T_i > 0 cellwise.
    """

    psi: np.ndarray
    T_e: np.ndarray
    T_i: np.ndarray
    t: float = 0.0

    @property
    def n_cells(self) -> int:
        return self.psi.shape[0]

    @property
    def order(self) -> int:
        return self.psi.shape[1] - 1

    @property
    def rho(self) -> np.ndarray:
        return 0.5 * self.psi[:, 0]

    def copy(self) -> "MomentState":
        return MomentState(self.psi.copy(), self.T_e.copy(), self.T_i.copy(), self.t)

    def validate(self):
        if np.any(self.psi[:, 0] < 0.0):
            raise ConfigurationError("psi_0 must be nonnegative cellwise")
        if np.any(self.T_e <= 0.0) or np.any(self.T_i <= 0.0):
            raise ConfigurationError("material temperatures must be positive cellwise")


@dataclass(frozen=True)
class BoundarySpec:
    """Periodic wraparound or inflow ghost data given as (T_e, T_i, T_r) triples."""

    kind: str = "periodic"
    left: tuple[float, float, float] | None = None
    right: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("periodic", "inflow"):
            raise ConfigurationError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "inflow":
            if self.left is None or self.right is None:
                raise ConfigurationError("inflow boundaries need left and right temperature triples")
            for side in (self.left, self.right):
                if any(T <= 0.0 for T in side):
                    raise ConfigurationError("inflow temperatures must be positive")


def periodic() -> BoundarySpec:
    return BoundarySpec(kind="periodic")


def inflow(left: tuple[float, float, float], right: tuple[float, float, float]) -> BoundarySpec:
    return BoundarySpec(kind="inflow", left=left, right=right)


@dataclass
class ExtendedFields:
    """Ghost-extended copies of the state fields (width ghost cells per side)."""

    psi: np.ndarray
    T_e: np.ndarray
    T_i: np.ndarray
    width: int


def _extend_array(values: np.ndarray, width: int, left, right, kind: str) -> np.ndarray:
    n = values.shape[0]
    out = np.empty((n + 2 * width,) + values.shape[1:], dtype=values.dtype)
    out[width : width + n] = values
    if kind == "periodic":
        out[:width] = values[n - width :]
        out[width + n :] = values[:width]
    else:
        out[:width] = left
        out[width + n :] = right
    return out


def extend_cell_field(values: np.ndarray, spec: BoundarySpec, width: int,
                      left_value=None, right_value=None) -> np.ndarray:
    """Ghost-extend one cellwise field; inflow ghosts take the given values."""
    if width not in SUPPORTED_GHOST_WIDTHS:
        raise ConfigurationError(f"ghost width must be one of {SUPPORTED_GHOST_WIDTHS}")
    if spec.kind == "periodic":
        return _extend_array(values, width, None, None, "periodic")
    return _extend_array(values, width, left_value, right_value, "inflow")


def boundary_ghost_moments(spec: BoundarySpec, params: PhysicalParams, order: int):
    """Isotropic-equilibrium ghost moment rows for both inflow sides.

    psi_0 = a*c*T_r^4 and all higher moments vanish; this realizes inflow data
    that are themselves equilibrium states.
    """
    rows = []
    for side in (spec.left, spec.right):
        row = np.zeros(order + 1)
        row[0] = 2.0 * radiation_density(side[2], params)
        rows.append(row)
    return rows[0], rows[1]


def extend_with_ghosts(state: MomentState, spec: BoundarySpec, width: int,
                       params: PhysicalParams) -> ExtendedFields:
    """Ghost-extend moments and temperatures per the boundary specification."""
    if width not in SUPPORTED_GHOST_WIDTHS:
        raise ConfigurationError(f"ghost width must be one of {SUPPORTED_GHOST_WIDTHS}")
    if spec.kind == "periodic":
        return ExtendedFields(
            psi=_extend_array(state.psi, width, None, None, "periodic"),
            T_e=_extend_array(state.T_e, width, None, None, "periodic"),
            T_i=_extend_array(state.T_i, width, None, None, "periodic"),
            width=width,
        )
    left_row, right_row = boundary_ghost_moments(spec, params, state.order)
    return ExtendedFields(
        psi=_extend_array(state.psi, width, left_row, right_row, "inflow"),
        T_e=_extend_array(state.T_e, width, spec.left[0], spec.right[0], "inflow"),
        T_i=_extend_array(state.T_i, width, spec.left[1], spec.right[1], "inflow"),
        width=width,
    )


def init_equilibrium(grid: Grid1D, T_profile, params: PhysicalParams, order: int) -> MomentState:
    """Equilibrium state: T_e = T_i = T(x), psi_0 = a*c*T^4, higher moments zero."""
    x = grid.centers()
    T = np.asarray(T_profile(x), dtype=float) * np.ones(grid.n)
    if np.any(T <= 0.0):
        raise ConfigurationError("initial temperature profile must be positive")
    psi = np.zeros((grid.n, order + 1))
    psi[:, 0] = 2.0 * radiation_density(T, params)
    return MomentState(psi=psi, T_e=T.copy(), T_i=T.copy(), t=0.0)
