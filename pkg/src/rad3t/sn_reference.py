"""Independent discrete-ordinates reference solver for the slab 3T system.

Marches the same two-way split as the moment solver, but with the angular
variable collocated at Gauss directions and first-order upwind transport:

* transport half (per-ordinate form of the split; couplings halved):

      eps^2/c d(psi_m)/dt + eps mu_m d(psi_m)/dx
          = -sigma psi_m + (sigma/2) rho + (sigma/4) a c T_e^4,

  plus the cell-local rho / T_e / T_i relaxation eliminated through the same
  quartic kernel as the moment solver (the angle integral of psi replaces
  2 rho).  Alternating iterations: a pointwise stage with transport frozen
  upwind at the previous iterate, then an implicit sweep per direction with
  frozen emission followed by a linearized local temperature update.
* macroscopic half: reuses the moment solver's macroscopic step on the
  angle-averaged density (conduction, sources, remaining coupling halves);
  ordinates are shifted by the isotropic density increment, the angular
  remainder being frozen in this half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .angular import Quadrature, gauss_legendre, project_to_moments
from .context import SolverContext
from .errors import ConfigurationError, SolverError
from .grid import BoundarySpec, Grid1D, MomentState
from .linalg import solve_tridiagonal
from .macro_solver import macro_step
from .micro_solver import (IterationControl, energy_lag_gap,
                           ion_after_relaxation, iteration_converged,
                           relaxation_quartic, rho_after_relaxation,
                           solve_unique_positive_root)
from .physics import PhysicalParams, opacity, radiation_density


@dataclass
class OrdinateField:
    """Intensities on N cells x n directions plus material temperatures."""

    psi: np.ndarray
    T_e: np.ndarray
    T_i: np.ndarray
    t: float = 0.0

    def copy(self) -> "OrdinateField":
        return OrdinateField(self.psi.copy(), self.T_e.copy(), self.T_i.copy(), self.t)

    def assert_admissible(self):
        if np.any(self.psi < 0.0):
            bad = np.argwhere(self.psi < 0.0)[0]
            raise SolverError(
                f"negative ordinate intensity at cell {bad[0]}, direction {bad[1]}")


def ordinate_equilibrium(grid: Grid1D, T_profile, params: PhysicalParams,
                         quad: Quadrature) -> OrdinateField:
    T = np.asarray(T_profile(grid.centers()), dtype=float) * np.ones(grid.n)
    psi = np.repeat(radiation_density(T, params)[:, None], quad.n, axis=1)
    return OrdinateField(psi=psi, T_e=T.copy(), T_i=T.copy(), t=0.0)


def sn_to_moments(field: OrdinateField, quad: Quadrature, M: int) -> MomentState:
    """Project the ordinates onto Legendre moments for cross-method comparison."""
    moments = project_to_moments(field.psi, quad, M)
    return MomentState(psi=moments, T_e=field.T_e.copy(), T_i=field.T_i.copy(),
                       t=field.t)


def _ghost_rows(field_psi, bc, params):
    if bc.kind == "periodic":
        return field_psi[-1], field_psi[0]
    n_dir = field_psi.shape[1]
    return (np.full(n_dir, radiation_density(bc.left[2], params)),
            np.full(n_dir, radiation_density(bc.right[2], params)))


def _upwind_gradient(psi, mu, dx, bc, params):
    """Explicit upwind d/dx per direction, (N, n)."""
    left, right = _ghost_rows(psi, bc, params)
    ext = np.vstack([left, psi, right])
    backward = (ext[1:-1] - ext[:-2]) / dx
    forward = (ext[2:] - ext[1:-1]) / dx
    return np.where(mu > 0.0, backward, forward)


def _implicit_sweep(psi_n, source, sigma, mu, w_time, eps, dx, bc, params):
    """Per-direction solve of (w_time + sigma + eps mu d/dx) psi = rhs."""
    N, n_dir = psi_n.shape
    out = np.empty_like(psi_n)
    left, right = _ghost_rows(psi_n, bc, params)
    periodic = bc.kind == "periodic"
    for m in range(n_dir):
        speed = eps * mu[m] / dx
        diag = w_time + sigma + abs(speed)
        rhs = w_time * psi_n[:, m] + source
        if periodic:
            if mu[m] > 0.0:
                out[:, m] = solve_tridiagonal(np.full(N, -speed), diag, np.zeros(N),
                                              rhs, corner_ul=-speed, corner_lr=0.0)
            else:
                out[:, m] = solve_tridiagonal(np.zeros(N), diag, np.full(N, speed),
                                              rhs, corner_ul=0.0, corner_lr=speed)
        else:
            ab = np.zeros((2, N))
            rhs = rhs.copy()
            if mu[m] > 0.0:
                ab[0] = diag
                ab[1, :-1] = -speed
                rhs[0] += speed * left[m]
                out[:, m] = sla.solve_banded((1, 0), ab, rhs)
            else:
                ab[1] = diag
                ab[0, 1:] = speed
                rhs[-1] -= speed * right[m]
                out[:, m] = sla.solve_banded((0, 1), ab, rhs)
    return out


def _sn_error(psi_a, Te_a, Ti_a, psi_b, Te_b, Ti_b, w, dt, dx) -> float:
    acc = np.sum(w * (psi_a - psi_b) ** 2, axis=1)
    acc = acc + (Te_a - Te_b) ** 2 + (Ti_a - Ti_b) ** 2
    return float(np.sqrt(dx * np.sum(acc)) / dt)


def sn_transport_half(field: OrdinateField, grid: Grid1D, params: PhysicalParams,
                      bc: BoundarySpec, quad: Quadrature, dt: float,
                      tol: float = 1.0e-10, max_iters: int = 200,
                      sigma_frac: float = 0.5,
                      kappa_frac: float = 0.5) -> tuple[OrdinateField, int]:
    """Implicit step of the transport half by alternating iterations."""
    eps, c, a = params.epsilon, params.c, params.a
    dx = grid.dx
    x = grid.centers()
    mu, w = quad.mu, quad.w
    w_time = eps**2 / (c * dt)

    psi_n, Te_n, Ti_n = field.psi, field.T_e, field.T_i
    rho_n = 0.5 * (psi_n @ w)
    psi_k, Te_k, Ti_k = psi_n.copy(), Te_n.copy(), Ti_n.copy()
    iters = 0
    prev_err = math.inf
    while True:
        # odd stage: transport frozen upwind, local coupling via the quartic
        sigma_k = opacity(x, Te_k, params.opacity_model)
        C_ve = params.C_ve_model(x, Te_k)
        C_vi = params.C_vi_model(x, Ti_k)
        kappa = params.kappa_model(x, Te_k)
        sigma_eff = sigma_frac * sigma_k
        ckappa_eff = kappa_frac * c * kappa
        elec_rhs = -eps**2 * energy_lag_gap(params.C_ve_model, C_ve, Te_k, Te_n) / dt
        ion_rhs = -eps**2 * energy_lag_gap(params.C_vi_model, C_vi, Ti_k, Ti_n) / dt
        grad = _upwind_gradient(psi_k, mu, dx, bc, params)
        g1 = grad @ (w * mu)
        coeffs = relaxation_quartic(
            rho_n, Te_n, Ti_n,
            sigma_eff=sigma_eff, ckappa_eff=ckappa_eff, C_ve=C_ve, C_vi=C_vi,
            eps=eps, c=c, a=a, dt=dt, rho_rhs=-eps * g1,
            elec_rhs=elec_rhs, ion_rhs=ion_rhs,
        )
        Te_o = solve_unique_positive_root(coeffs)
        Ti_o = ion_after_relaxation(Te_o, Ti_n, ckappa_eff=ckappa_eff, C_vi=C_vi,
                                    eps=eps, dt=dt, ion_rhs=ion_rhs)
        rho_o = rho_after_relaxation(Te_o**4, rho_n, sigma_eff=sigma_eff,
                                     eps=eps, c=c, a=a, dt=dt, rho_rhs=-eps * g1)
        sigma_o = opacity(x, Te_o, params.opacity_model)

        # even stage: implicit sweep with the isotropic source frozen, then a
        # linearized local temperature update against the fresh angle average
        source = 0.5 * sigma_o * rho_o + 0.25 * sigma_o * a * c * Te_o**4
        psi_e = _implicit_sweep(psi_n, source, sigma_o, mu, w_time, eps, dx,
                                bc, params)
        Psi0_e = psi_e @ w
        C_ve = params.C_ve_model(x, Te_o)
        C_vi = params.C_vi_model(x, Ti_o)
        kappa = params.kappa_model(x, Te_o)
        sigma_eff = sigma_frac * sigma_o
        ckappa_eff = kappa_frac * c * kappa
        elec_rhs = -eps**2 * energy_lag_gap(params.C_ve_model, C_ve, Te_o, Te_n) / dt
        ion_rhs = -eps**2 * energy_lag_gap(params.C_vi_model, C_vi, Ti_o, Ti_n) / dt
        denom_ion = eps**2 * C_vi + ckappa_eff * dt
        a_e = (eps**2 * C_ve / dt + ckappa_eff * eps**2 * C_vi / denom_ion
               + sigma_eff * a * c * Te_o**3)
        b_e = (eps**2 * C_ve * Te_n / dt
               + ckappa_eff * (eps**2 * C_vi * Ti_n + dt * ion_rhs) / denom_ion
               + sigma_eff * Psi0_e + elec_rhs)
        Te_e = b_e / a_e
        Ti_e = ion_after_relaxation(Te_e, Ti_n, ckappa_eff=ckappa_eff, C_vi=C_vi,
                                    eps=eps, dt=dt, ion_rhs=ion_rhs)
        if np.any(Te_e <= 0.0) or np.any(Ti_e <= 0.0):
            raise SolverError("ordinate solver produced a nonpositive temperature")

        iters += 2
        err = _sn_error(psi_e, Te_e, Ti_e, psi_k, Te_k, Ti_k, w, dt, dx)
        psi_k, Te_k, Ti_k = psi_e, Te_e, Ti_e
        if not math.isfinite(err):
            raise SolverError("ordinate iteration diverged")
        if iteration_converged(err, prev_err, tol):
            break
        prev_err = err
        if iters >= max_iters:
            raise SolverError(f"ordinate iteration stalled at residual {err:.3e}")
    return OrdinateField(psi=psi_k, T_e=Te_k, T_i=Ti_k, t=field.t), iters


def sn_step(field: OrdinateField, grid: Grid1D, params: PhysicalParams,
            bc: BoundarySpec, quad: Quadrature, dt: float, *,
            sources=(), t_source: float | None = None,
            tol: float = 1.0e-10, max_iters: int = 200,
            macro_ctx: SolverContext | None = None,
            macro_control: IterationControl | None = None) -> tuple[OrdinateField, int, int]:
    """One full split step: transport half, then the macroscopic half.

    The macroscopic half runs the moment solver's machinery on the angle
    average; the angular remainder is frozen, so every ordinate is shifted by
    the isotropic density increment.
    """
    mid, t_iters = sn_transport_half(field, grid, params, bc, quad, dt,
                                     tol=tol, max_iters=max_iters)
    if macro_ctx is None:
        macro_ctx = SolverContext(grid=grid, params=params, bc=bc,
                                  sources=tuple(sources))
    if macro_control is None:
        macro_control = IterationControl(tol=tol, max_iters=max_iters)
    psi_mom = np.zeros((grid.n, 2))
    rho_mid = 0.5 * (mid.psi @ quad.w)
    psi_mom[:, 0] = 2.0 * rho_mid
    shell = MomentState(psi=psi_mom, T_e=mid.T_e, T_i=mid.T_i, t=field.t)
    out_shell, m_iters = macro_step(macro_ctx, shell, dt, macro_control,
                                    t_source if t_source is not None else field.t + dt)
    delta_rho = 0.5 * out_shell.psi[:, 0] - rho_mid
    out = OrdinateField(psi=mid.psi + delta_rho[:, None],
                        T_e=out_shell.T_e, T_i=out_shell.T_i, t=field.t + dt)
    out.assert_admissible()
    return out, t_iters, m_iters


class SnStepper:
    """Stepper adapter used by the run driver."""

    def __init__(self, config):
        self.config = config
        self.grid = config.grid
        self.params = config.params
        self.bc = config.bc
        self.quad = gauss_legendre(config.n_directions)
        if self.quad.n < config.m_order + 1:
            raise ConfigurationError(
                f"{config.n_directions} directions cannot project onto M = {config.m_order}")
        self.field = ordinate_equilibrium(config.grid, config.initial.profile(),
                                          config.params, self.quad)
        self.tol = config.tol
        self.max_iters = config.max_iters
        self.macro_ctx = SolverContext(grid=config.grid, params=config.params,
                                       bc=config.bc, sources=tuple(config.sources))
        self.macro_control = IterationControl(tol=config.tol, max_iters=config.max_iters)

    def advance(self, dt: float):
        self.field, t_iters, m_iters = sn_step(
            self.field, self.grid, self.params, self.bc, self.quad, dt,
            t_source=self.field.t + dt, tol=self.tol, max_iters=self.max_iters,
            macro_ctx=self.macro_ctx, macro_control=self.macro_control)
        return t_iters, m_iters, False

    def energy(self) -> float:
        from .diagnostics import heat_capacity_energy
        E_r = (self.field.psi @ self.quad.w) / self.params.c
        E_e = heat_capacity_energy(self.params.C_ve_model, self.field.T_e)
        E_i = heat_capacity_energy(self.params.C_vi_model, self.field.T_i)
        return float(self.grid.dx * np.sum(E_r + E_e + E_i))

    def snapshot(self) -> MomentState:
        return sn_to_moments(self.field, self.quad, self.config.m_order)
