"""Energy audits, error norms, convergence orders, and the diffusion-limit reference.

The diffusion reference integrates the equilibrium-limit equation

    d/dt (a T^4 + (C_ve + C_vi) T) = d/dx ( a c / (3 sigma) d/dx T^4 )
                                   + d/dx ( (D_e + D_i) d/dx T )

with backward Euler in time and lagged-coefficient Picard iterations: each
pass linearizes T^4 as (T_prev)^3 T, freezes the face coefficients at T_prev,
and solves one tridiagonal system.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SolverError
from .grid import MomentState, extend_cell_field, init_equilibrium
from .linalg import solve_tridiagonal
from .physics import CoefficientModel, PhysicalParams, conduction_coeff, opacity, radiation_density
from .spatial import face_average


def heat_capacity_energy(model: CoefficientModel, T):
    """Material energy per unit volume, E = integral of C_v(T') dT' from 0 to T."""
    if model.spatial_table is not None:
        raise ConfigurationError("energy audit does not support spatial heat-capacity tables")
    return model.base * np.power(T, model.exponent + 1.0) / (model.exponent + 1.0)


def total_energy(state: MomentState, params: PhysicalParams, dx: float) -> float:
    """Discrete total energy sum_j dx (E_e + E_i + 2 rho / c)_j."""
    E_e = heat_capacity_energy(params.C_ve_model, state.T_e)
    E_i = heat_capacity_energy(params.C_vi_model, state.T_i)
    return float(dx * np.sum(E_e + E_i + state.psi[:, 0] / params.c))


def restrict_cell_average(values: np.ndarray, factor: int) -> np.ndarray:
    """Conservative restriction: average blocks of ``factor`` fine cells."""
    n = values.shape[0]
    if n % factor:
        raise ConfigurationError(f"cannot restrict {n} cells by factor {factor}")
    return values.reshape(n // factor, factor).mean(axis=1)


def l2_error(field: np.ndarray, reference: np.ndarray, domain_length: float) -> float:
    """sqrt(dx * sum (field - restricted reference)^2) on the coarse grid."""
    n_c, n_f = field.shape[0], reference.shape[0]
    if n_f % n_c:
        raise ConfigurationError(
            f"reference resolution {n_f} is not a multiple of the field's {n_c}")
    ref = restrict_cell_average(reference, n_f // n_c)
    dx = domain_length / n_c
    return float(np.sqrt(dx * np.sum((field - ref) ** 2)))


@dataclass
class ConvergenceTable:
    """Errors per resolution and the observed orders between successive rows."""

    resolutions: list
    errors: dict          # field name -> list of errors, one per resolution
    orders: dict          # field name -> list of orders (len = rows - 1)


def convergence_orders(resolutions, errors) -> list:
    orders = []
    for i in range(len(resolutions) - 1):
        ratio = errors[i] / errors[i + 1]
        orders.append(float(np.log(ratio) / np.log(resolutions[i + 1] / resolutions[i])))
    return orders


def convergence_table(resolutions, errors_by_field) -> ConvergenceTable:
    orders = {name: convergence_orders(resolutions, errs)
              for name, errs in errors_by_field.items()}
    return ConvergenceTable(resolutions=list(resolutions),
                            errors=dict(errors_by_field), orders=orders)


def moment_decay_report(state: MomentState):
    """Max-norm per moment and the ratios max|psi_{l+1}| / max|psi_l|.

    Ratios are reported as NaN where the lower moment vanishes.
    """
    max_abs = np.max(np.abs(state.psi), axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(max_abs[:-1] > 0.0, max_abs[1:] / max_abs[:-1], np.nan)
    return max_abs, ratios


# ---------------------------------------------------------------------------
# diffusion-limit reference solver
# ---------------------------------------------------------------------------

def _diffusion_heat_capacity(params: PhysicalParams) -> float:
    for model in (params.C_ve_model, params.C_vi_model):
        if not model.is_constant:
            raise ConfigurationError(
                "diffusion reference supports constant heat capacities only")
    return params.C_ve_model.base + params.C_vi_model.base


def diffusion_step(grid, params: PhysicalParams, bc, T: np.ndarray, dt: float,
                   tol: float = 1.0e-12, max_iters: int = 400) -> tuple[np.ndarray, int]:
    """One backward-Euler step of the equilibrium diffusion equation.

    Picard with lagged coefficients: the radiative flux is written in chain
    form (a c / (3 sigma)) * 4 T^3 * dT/dx with the effective diffusivity
    frozen at the previous iterate, the radiation energy a T^4 is linearized
    about the previous iterate (a T^4 ~ 4 a T_prev^3 T - 3 a T_prev^4, whose
    lag sensitivity vanishes at the fixed point), and each pass solves one
    tridiagonal system.
    """
    N = grid.n
    dx = grid.dx
    a, c = params.a, params.c
    Cv = _diffusion_heat_capacity(params)
    periodic = bc.kind == "periodic"

    def ghost(T_now):
        if periodic:
            return extend_cell_field(T_now, bc, 1)
        return extend_cell_field(T_now, bc, 1, bc.left[2], bc.right[2])

    xg = grid.ghosted_centers(1)
    T_new = T.copy()
    iters = 0
    for _ in range(max_iters):
        iters += 1
        Tg = ghost(T_new)
        sig = opacity(xg, Tg, params.opacity_model)
        D_face = face_average(a * c / (3.0 * sig) * 4.0 * Tg**3
                              + conduction_coeff("e", Tg, params)
                              + conduction_coeff("i", Tg, params))
        cube = Tg[1:-1] ** 3

        inv_dx2 = 1.0 / dx**2
        diag = (4.0 * a * cube + Cv) / dt + (D_face[1:] + D_face[:-1]) * inv_dx2
        up = -D_face[1:] * inv_dx2
        lo = -D_face[:-1] * inv_dx2
        rhs = (a * T**4 + Cv * T + 3.0 * a * cube * T_new) / dt
        if periodic:
            T_next = solve_tridiagonal(lo, diag, up, rhs,
                                       corner_ul=lo[0], corner_lr=up[-1])
        else:
            rhs = rhs.copy()
            rhs[0] -= lo[0] * Tg[0]
            rhs[-1] -= up[-1] * Tg[-1]
            T_next = solve_tridiagonal(lo, diag, up, rhs)
        if np.any(T_next <= 0.0):
            raise SolverError("diffusion reference produced a nonpositive temperature")
        change = float(np.max(np.abs(T_next - T_new)) / max(1.0, float(np.max(T_next))))
        T_new = T_next
        if change <= tol:
            break
    else:
        raise SolverError("diffusion reference iteration did not converge")
    return T_new, iters


class DiffusionStepper:
    """Single-temperature stepper used when the solver kind is diffusion_ref."""

    def __init__(self, config):
        self.config = config
        self.grid = config.grid
        self.params = config.params
        self.bc = config.bc
        state = init_equilibrium(config.grid, config.initial.profile(),
                                 config.params, 1)
        self.T = state.T_e
        self.t = 0.0
        self.tol = min(config.tol, 1.0e-11)
        self.max_iters = max(config.max_iters, 400)
        self._m_order = config.m_order

    def advance(self, dt: float):
        self.T, iters = diffusion_step(self.grid, self.params, self.bc, self.T, dt,
                                       tol=self.tol, max_iters=self.max_iters)
        self.t += dt
        return iters, 0, False

    def energy(self) -> float:
        Cv = _diffusion_heat_capacity(self.params)
        return float(self.grid.dx * np.sum(self.params.a * self.T**4 + Cv * self.T))

    def snapshot(self) -> MomentState:
        psi = np.zeros((self.grid.n, self._m_order + 1))
        psi[:, 0] = 2.0 * radiation_density(self.T, self.params)
        return MomentState(psi=psi, T_e=self.T.copy(), T_i=self.T.copy(), t=self.t)


def diffusion_reference_run(config):
    """Run the scenario with the equilibrium-diffusion reference solver."""
    from .integrator import run

    cfg = config.with_updates(solver="diffusion_ref")
    return run(cfg)
