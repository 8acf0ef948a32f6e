"""Transport (microscopic) half of the splitting: alternating implicit iterations.

One iteration pair consists of

* an odd stage: the cell-local quartic gives T_e with rho and T_i eliminated,
  then psi_1..psi_M are updated pointwise in a single pass, lower-moment
  derivatives taken at the fresh iterate and upper-moment derivatives at the
  previous one;
* an even stage: the emission is linearized about the odd iterate, T_e and T_i
  are eliminated cellwise, and the resulting (rho, psi_1) system with implicit
  centered fluxes is solved over all cells at once, after which psi_2..psi_M
  are swept as in the odd stage.

Pairs repeat until the weighted residual drops below tolerance.  The cellwise
elimination, generalized to arbitrary coupling fractions and extra right-hand
sides, also serves the macroscopic half and both reference solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import lower_coef, upper_coef
from .context import SolverContext
from .errors import SolverError
from .grid import MomentState, boundary_ghost_moments, extend_cell_field, extend_with_ghosts
from .linalg import solve_sparse_system
from .spatial import (alpha_coeff, central_average, flux_divergence, jump,
                      reconstruct, required_ghost_width)

QUARTIC_TOL = 1.0e-14

#: residuals within this factor of the tolerance may stop on stagnation
STAGNATION_CEILING = 1.0e3


def iteration_converged(err: float, prev_err: float, tol: float) -> bool:
    """Tolerance test with a roundoff-floor escape.

    A residual that stops contracting while already within
    STAGNATION_CEILING * tol has hit the double-precision floor of the inner
    linear solves (the scaled residual divides by dt, so the floor can sit
    above tol on fine meshes in stiff regimes); further sweeps only reshuffle
    roundoff.  Only a plateau qualifies: residual ratios outside [0.25, 4]
    mean the iteration is still moving (or diverging) and must continue.
    """
    if err < tol:
        return True
    return (err <= STAGNATION_CEILING * tol
            and 0.25 * prev_err <= err <= 4.0 * prev_err)


@dataclass
class QuarticCoefficients:
    """Coefficients of the cell-local electron-temperature equation
    C4*T^4 + C1*T + C0 = 0 (unique positive root when C4 >= 0, C1 > 0, C0 < 0)."""

    C4: np.ndarray
    C1: np.ndarray
    C0: np.ndarray


@dataclass
class IterationControl:
    """Stopping data for the alternating iterations.

    ``prefer_picard`` records that the macroscopic solver had to fall back to
    plain Picard iterations on the implicit stage; later steps then start in
    that mode instead of rediscovering the failure.
    """

    tol: float = 1.0e-10
    max_iters: int = 200
    last_error: float = math.inf
    iters_used: int = 0
    prefer_picard: bool = False


# ---------------------------------------------------------------------------
# cell-local elimination kernel (shared by all implicit sub-solvers)
# ---------------------------------------------------------------------------

def relaxation_quartic(rho_base, Te_base, Ti_base, *, sigma_eff, ckappa_eff,
                       C_ve, C_vi, eps, c, a, dt,
                       rho_rhs=0.0, elec_rhs=0.0, ion_rhs=0.0,
                       elec_damp=0.0, ion_damp=0.0) -> QuarticCoefficients:
    """Eliminate rho and T_i from one backward-Euler relaxation stage.

    The stage reads (sigma_eff and ckappa_eff are the coupling fractions times
    sigma and c*kappa; the *_rhs terms collect fluxes, conduction, and sources;
    the *_damp terms are implicit linear sinks, used for the diagonal of the
    conduction stencil so explicit neighbor terms cannot destabilize a cell)

        (2 eps^2 / c) (rho' - rho_base)/dt = -sigma_eff (2 rho' - a c T'^4) + rho_rhs
        eps^2 C_ve (T_e' - Te_base)/dt     = ckappa_eff (T_i' - T_e')
                                             + sigma_eff (2 rho' - a c T'^4)
                                             + elec_rhs - eps^2 elec_damp T_e'
        eps^2 C_vi (T_i' - Ti_base)/dt     = ckappa_eff (T_e' - T_i')
                                             + ion_rhs - eps^2 ion_damp T_i'
    """
    denom_rho = eps**2 + sigma_eff * c * dt
    denom_ion = eps**2 * (C_vi + ion_damp * dt) + ckappa_eff * dt
    C4 = sigma_eff * a * c * dt / denom_rho
    C1 = (C_ve + elec_damp * dt
          + ckappa_eff * dt * (C_vi + ion_damp * dt) / denom_ion)
    C0 = (
        -C_ve * Te_base
        - ckappa_eff * dt * (C_vi * Ti_base + dt * ion_rhs / eps**2) / denom_ion
        - sigma_eff * dt * (2.0 * rho_base + c * dt * rho_rhs / eps**2) / denom_rho
        - dt * elec_rhs / eps**2
    )
    C0 = np.asarray(C0, dtype=float)
    return QuarticCoefficients(C4=np.broadcast_to(np.asarray(C4, float), C0.shape).copy(),
                               C1=np.broadcast_to(np.asarray(C1, float), C0.shape).copy(),
                               C0=C0)


def rho_after_relaxation(T_e4, rho_base, *, sigma_eff, eps, c, a, dt, rho_rhs=0.0):
    """Back-substitute rho' once T_e'^4 (or its linearized emission) is known."""
    denom_rho = eps**2 + sigma_eff * c * dt
    return (2.0 * eps**2 * rho_base + sigma_eff * a * c**2 * dt * T_e4 + c * dt * rho_rhs) / (
        2.0 * denom_rho
    )


def ion_after_relaxation(T_e, Ti_base, *, ckappa_eff, C_vi, eps, dt, ion_rhs=0.0,
                         ion_damp=0.0):
    """Back-substitute T_i' from the relaxed electron temperature."""
    denom_ion = eps**2 * (C_vi + ion_damp * dt) + ckappa_eff * dt
    return (eps**2 * C_vi * Ti_base + dt * ion_rhs + ckappa_eff * dt * T_e) / denom_ion


def linearized_electron_coeffs(Te_base, Ti_base, T_lin, *, sigma_eff, ckappa_eff,
                               C_ve, C_vi, eps, c, a, dt, elec_rhs=0.0, ion_rhs=0.0):
    """Coefficients (a_e, b_e) such that T_e'' = (b_e + 2 sigma_eff rho'') / a_e.

    Even-stage analogue of the quartic: the emission is linearized as
    a c T_lin^3 T_e'' about the previous iterate T_lin.
    """
    denom_ion = eps**2 * C_vi + ckappa_eff * dt
    a_e = (
        eps**2 * C_ve / dt
        + ckappa_eff * eps**2 * C_vi / denom_ion
        + sigma_eff * a * c * T_lin**3
    )
    b_e = (
        eps**2 * C_ve * Te_base / dt
        + ckappa_eff * (eps**2 * C_vi * Ti_base + dt * ion_rhs) / denom_ion
        + elec_rhs
    )
    return a_e, b_e


def energy_lag_gap(model, C_lag, T_lag, T_base):
    """Defect of the linear energy expansion about the lagged iterate.

    For a temperature-dependent heat capacity the stage equation advances the
    material energy E(T) = integral of C_v; expanding E about the previous
    iterate T_lag gives E(T') ~ E(T_lag) + C_v(T_lag) (T' - T_lag), so the
    discrete time term carries the constant

        gap = E(T_lag) - E(T_base) - C_v(T_lag) (T_lag - T_base)

    (identically zero for constant C_v, and vanishing at the fixed point,
    where it makes the step an exact integral-energy discretization).
    """
    if model.exponent == 0.0:
        return 0.0
    m = model.exponent

    def energy(T):
        return model.base * T ** (m + 1.0) / (m + 1.0)

    return energy(T_lag) - energy(T_base) - C_lag * (T_lag - T_base)


def quartic_coefficients(rho_n, Te_n, Ti_n, sigma, dpsi1_dx, params, dt,
                         C_ve=None, C_vi=None, kappa=None) -> QuarticCoefficients:
    """Quartic coefficients of the transport-half odd stage (half couplings).

    ``sigma`` and ``dpsi1_dx`` are the opacity and the psi_1 flux divergence at
    the lagged iterate; heat capacities and kappa default to the constant
    models when not supplied as lagged fields.
    """
    C_ve = params.C_ve_model.base if C_ve is None else C_ve
    C_vi = params.C_vi_model.base if C_vi is None else C_vi
    kappa = params.kappa_model.base if kappa is None else kappa
    return relaxation_quartic(
        rho_n, Te_n, Ti_n,
        sigma_eff=0.5 * np.asarray(sigma, dtype=float),
        ckappa_eff=0.5 * params.c * np.asarray(kappa, dtype=float),
        C_ve=C_ve, C_vi=C_vi,
        eps=params.epsilon, c=params.c, a=params.a, dt=dt,
        rho_rhs=-params.epsilon * np.asarray(dpsi1_dx, dtype=float),
    )


def solve_unique_positive_root(coeffs: QuarticCoefficients, tol: float = QUARTIC_TOL) -> np.ndarray:
    """Unique positive root of C4 T^4 + C1 T + C0 = 0, vectorized over cells.

    Newton from the bracket midpoint; f is increasing and convex on T > 0, so
    after the first overshoot the iterates decrease monotonically toward the
    root.  Any iterate leaving the bracket is replaced by its midpoint.
    """
    C4 = np.atleast_1d(np.asarray(coeffs.C4, dtype=float))
    C1 = np.atleast_1d(np.asarray(coeffs.C1, dtype=float))
    C0 = np.atleast_1d(np.asarray(coeffs.C0, dtype=float))
    bad = (C4 < 0.0) | (C1 <= 0.0) | (C0 >= 0.0)
    if np.any(bad):
        raise SolverError(
            f"quartic precondition violated at cells {np.where(bad)[0][:8].tolist()}: "
            "need C4 >= 0, C1 > 0, C0 < 0"
        )

    upper = -C0 / C1
    with np.errstate(divide="ignore", over="ignore"):
        cap = np.power(-C0 / np.where(C4 > 0.0, C4, 1.0), 0.25)
    upper = np.where(C4 > 0.0, np.minimum(upper, cap), upper)
    lo = np.zeros_like(upper)
    hi = upper.copy()
    T = 0.5 * hi
    f_tol = np.minimum(1.0e-14 * np.maximum(np.abs(C0), C1),
                       1.0e-13 * np.maximum(1.0, np.abs(C0)))

    for _ in range(200):
        fT = C4 * T**4 + C1 * T + C0
        lo = np.where(fT < 0.0, T, lo)
        hi = np.where(fT > 0.0, T, hi)
        T_new = T - fT / (4.0 * C4 * T**3 + C1)
        outside = (T_new <= lo) | (T_new >= hi)
        T_new = np.where(outside, 0.5 * (lo + hi), T_new)
        done = (np.abs(T_new - T) <= tol * np.maximum(T_new, tol)) | (np.abs(fT) <= f_tol)
        T = np.where(done, T, T_new)
        if np.all(done):
            break
    return T


# ---------------------------------------------------------------------------
# transport-half machinery
# ---------------------------------------------------------------------------

@dataclass
class Iterate:
    """Fields of one iteration level."""

    psi: np.ndarray
    T_e: np.ndarray
    T_i: np.ndarray
    sigma: np.ndarray

    def copy(self) -> "Iterate":
        return Iterate(self.psi.copy(), self.T_e.copy(), self.T_i.copy(), self.sigma.copy())


def _ghosted_psi(ctx: SolverContext, psi, T_e, T_i):
    state = MomentState(psi=psi, T_e=T_e, T_i=T_i, t=0.0)
    return extend_with_ghosts(state, ctx.bc, 2, ctx.params)


def _traces(ext_psi: np.ndarray, mode: str):
    """Interface traces from a width-2 ghosted array, trimmed to the mode's need."""
    trim = 2 - required_ghost_width(mode)
    arr = ext_psi[trim : ext_psi.shape[0] - trim] if trim else ext_psi
    return reconstruct(arr, mode)


def interface_alpha(ctx: SolverContext, T_e: np.ndarray) -> np.ndarray:
    """Stabilization coefficient at the N+1 interfaces from the ghosted opacity."""
    if ctx.bc.kind == "periodic":
        Tg = extend_cell_field(T_e, ctx.bc, 1)
    else:
        Tg = extend_cell_field(T_e, ctx.bc, 1, ctx.bc.left[0], ctx.bc.right[0])
    sig = ctx.sigma_ghosted(Tg, 1)
    return alpha_coeff(sig[:-1], sig[1:], ctx.params.epsilon, ctx.params.c)


def _ghost_column(ctx: SolverContext, values: np.ndarray, l: int, order: int) -> np.ndarray:
    """Width-1 ghost extension of a single moment column."""
    if ctx.bc.kind == "periodic":
        return extend_cell_field(values, ctx.bc, 1)
    left_row, right_row = boundary_ghost_moments(ctx.bc, ctx.params, order)
    return extend_cell_field(values, ctx.bc, 1, left_row[l], right_row[l])


def micro_error(psi_a, Te_a, Ti_a, psi_b, Te_b, Ti_b, dt, dx) -> float:
    """Weighted root-sum-of-squares residual of one iteration pair, over dt.

    Moment l carries weight 2/(2l+1) (the psi_0 difference thus enters with
    weight 2); temperature differences enter with unit weight.
    """
    M = psi_a.shape[1] - 1
    weights = 2.0 / (2.0 * np.arange(M + 1) + 1.0)
    acc = np.sum(weights * (psi_a - psi_b) ** 2, axis=1)
    acc = acc + (Te_a - Te_b) ** 2 + (Ti_a - Ti_b) ** 2
    return float(np.sqrt(dx * np.sum(acc)) / dt)


def _kinetic_end_fluxes(ctx: SolverContext, l, psi_new, psi_old):
    """Explicit parts of the upwind boundary fluxes for the psi_l equation.

    Interior moments below l come from the fresh iterate, those above l from
    the lagged one; the k = l interior contribution is excluded here because
    the caller treats it implicitly (its coefficient is HL[l, l] at both ends).
    Returns (F_left, F_right, HL[l, l]).
    """
    M = psi_old.shape[1] - 1
    HL, HR = ctx.half_range_matrices(M)
    ghost_l, ghost_r = boundary_ghost_moments(ctx.bc, ctx.params, M)
    u_left_new = psi_new[0] if psi_new is not None else psi_old[0]
    u_right_new = psi_new[-1] if psi_new is not None else psi_old[-1]
    F_left = HL[l] @ ghost_l
    F_right = HR[l] @ ghost_r
    for k in range(M + 1):
        if k == l:
            continue
        vl = u_left_new[k] if k < l else psi_old[0, k]
        vr = u_right_new[k] if k < l else psi_old[-1, k]
        F_left += HR[l, k] * vl
        F_right += HL[l, k] * vr
    return F_left, F_right, HL[l, l]


def _sweep_moments(ctx: SolverContext, psi_new, sigma_new, alpha_new,
                   old_iv_recon, old_iv_const, alpha_old, psi_old,
                   psi_n, dt, start_l):
    """Update psi_l for l = start_l..M pointwise, lower moments at the fresh level.

    The closing moment's stabilization keeps its diagonal implicit and lags the
    neighbor contribution, preserving pointwise updates.  At inflow boundaries
    the end-interface fluxes are replaced by half-range upwind fluxes whose
    diagonal part is also implicit.
    """
    params = ctx.params
    eps, c = params.epsilon, params.c
    dx = ctx.grid.dx
    N, M = psi_new.shape[0], psi_new.shape[1] - 1
    inv_cdt = eps**2 / (c * dt)
    inflow = ctx.bc.kind == "inflow"
    if inflow:
        alpha_new = alpha_new.copy()
        alpha_new[0] = alpha_new[-1] = 0.0
    old_psi_M = _ghost_column(ctx, psi_old[:, M], M, M)

    for l in range(start_l, M + 1):
        col = _ghost_column(ctx, psi_new[:, l - 1], l - 1, M)
        flux_new = lower_coef(l) * 0.5 * (col[:-1] + col[1:])
        if l <= M - 1:
            flux_old = upper_coef(l) * central_average(old_iv_recon, l + 1) \
                - 0.5 * alpha_old * jump(old_iv_const, l)
        else:
            flux_old = np.zeros(N + 1)
        extra_den = np.zeros(N)
        if l == M:
            ap, am = alpha_new[1:], alpha_new[:-1]
            extra_den += eps * (ap + am) / (2.0 * dx)
        if inflow:
            flux_new = flux_new.copy()
            flux_old = flux_old.copy()
            flux_new[0] = flux_new[-1] = 0.0
            flux_old[0] = flux_old[-1] = 0.0
        div = flux_divergence(flux_new + flux_old, dx)
        if l == M:
            ap, am = alpha_new[1:], alpha_new[:-1]
            div = div - (ap * old_psi_M[2:] + am * old_psi_M[:-2]) / (2.0 * dx)
        if inflow:
            F_left, F_right, diag = _kinetic_end_fluxes(ctx, l, psi_new, psi_old)
            div = div.copy()
            div[0] -= F_left / dx
            div[-1] += F_right / dx
            extra_den = extra_den.copy()
            extra_den[0] += eps * diag / dx
            extra_den[-1] += eps * diag / dx

        psi_new[:, l] = (inv_cdt * psi_n[:, l] - eps * (div + 0.0)) / (
            inv_cdt + sigma_new + extra_den
        )
    return psi_new


def micro_odd_sweep(ctx: SolverContext, base: Iterate, it: Iterate, dt: float) -> Iterate:
    """One odd stage: quartic update of (T_e, rho, T_i), then the moment sweep."""
    params = ctx.params
    eps, c, a = params.epsilon, params.c, params.a
    dx = ctx.grid.dx
    w = ctx.micro_weights

    ext = _ghosted_psi(ctx, it.psi, it.T_e, it.T_i)
    iv_recon = _traces(ext.psi, ctx.reconstruction)
    iv_const = _traces(ext.psi, "constant")
    alpha_old = interface_alpha(ctx, it.T_e)

    # explicit psi_1 flux divergence entering the rho / T_e block
    flux1 = upper_coef(0) * central_average(iv_recon, 1) - 0.5 * alpha_old * jump(iv_const, 0)
    if ctx.bc.kind == "inflow":
        M = it.psi.shape[1] - 1
        HL, HR = ctx.half_range_matrices(M)
        ghost_l, ghost_r = boundary_ghost_moments(ctx.bc, ctx.params, M)
        flux1 = flux1.copy()
        flux1[0] = HL[0] @ ghost_l + HR[0] @ it.psi[0]
        flux1[-1] = HL[0] @ it.psi[-1] + HR[0] @ ghost_r
    g1 = flux_divergence(flux1, dx)

    C_ve, C_vi, kappa = ctx.material_lag(it.T_e, it.T_i)
    sigma_eff = w.sigma * it.sigma
    ckappa_eff = w.kappa * c * kappa
    elec_rhs = -eps**2 * energy_lag_gap(params.C_ve_model, C_ve, it.T_e, base.T_e) / dt
    ion_rhs = -eps**2 * energy_lag_gap(params.C_vi_model, C_vi, it.T_i, base.T_i) / dt

    coeffs = relaxation_quartic(
        0.5 * base.psi[:, 0], base.T_e, base.T_i,
        sigma_eff=sigma_eff, ckappa_eff=ckappa_eff, C_ve=C_ve, C_vi=C_vi,
        eps=eps, c=c, a=a, dt=dt, rho_rhs=-eps * g1,
        elec_rhs=elec_rhs, ion_rhs=ion_rhs,
    )
    T_e = solve_unique_positive_root(coeffs)
    rho = rho_after_relaxation(T_e**4, 0.5 * base.psi[:, 0], sigma_eff=sigma_eff,
                               eps=eps, c=c, a=a, dt=dt, rho_rhs=-eps * g1)
    T_i = ion_after_relaxation(T_e, base.T_i, ckappa_eff=ckappa_eff, C_vi=C_vi,
                               eps=eps, dt=dt, ion_rhs=ion_rhs)
    sigma_new = ctx.sigma_cells(T_e)
    alpha_new = interface_alpha(ctx, T_e)

    psi_new = np.empty_like(it.psi)
    psi_new[:, 0] = 2.0 * rho
    psi_new = _sweep_moments(ctx, psi_new, sigma_new, alpha_new,
                             iv_recon, iv_const, alpha_old, it.psi,
                             base.psi, dt, start_l=1)
    return Iterate(psi=psi_new, T_e=T_e, T_i=T_i, sigma=sigma_new)


def micro_even_solve(ctx: SolverContext, base: Iterate, it: Iterate, dt: float) -> Iterate:
    """One even stage: global (rho, psi_1) solve, then the tail-moment sweep."""
    params = ctx.params
    eps, c, a = params.epsilon, params.c, params.a
    dx = ctx.grid.dx
    N = ctx.grid.n
    w = ctx.micro_weights
    inv_cdt = eps**2 / (c * dt)

    ext = _ghosted_psi(ctx, it.psi, it.T_e, it.T_i)
    iv_recon = _traces(ext.psi, ctx.reconstruction)
    iv_const = _traces(ext.psi, "constant")
    alpha = interface_alpha(ctx, it.T_e)

    C_ve, C_vi, kappa = ctx.material_lag(it.T_e, it.T_i)
    sigma_eff = w.sigma * it.sigma
    ckappa_eff = w.kappa * c * kappa
    elec_rhs = -eps**2 * energy_lag_gap(params.C_ve_model, C_ve, it.T_e, base.T_e) / dt
    ion_rhs = -eps**2 * energy_lag_gap(params.C_vi_model, C_vi, it.T_i, base.T_i) / dt
    a_e, b_e = linearized_electron_coeffs(
        base.T_e, base.T_i, it.T_e, sigma_eff=sigma_eff, ckappa_eff=ckappa_eff,
        C_ve=C_ve, C_vi=C_vi, eps=eps, c=c, a=a, dt=dt,
        elec_rhs=elec_rhs, ion_rhs=ion_rhs,
    )
    emis = a * c * it.T_e**3
    inflow = ctx.bc.kind == "inflow"

    # explicit part of the psi_1 equation (upper-moment flux at the odd level)
    flux2 = upper_coef(1) * central_average(iv_recon, 2) - 0.5 * alpha * jump(iv_const, 1)
    if inflow:
        # end interfaces are handled by the upwind boundary flux below
        alpha = alpha.copy()
        alpha[0] = alpha[-1] = 0.0
        flux2 = flux2.copy()
        flux2[0] = flux2[-1] = 0.0
    div_old1 = flux_divergence(flux2, dx)

    alpha_p, alpha_m = alpha[1:], alpha[:-1]
    idx_rho = 2 * np.arange(N)
    idx_psi = idx_rho + 1
    rows, cols, vals = [], [], []
    rhs = np.zeros(2 * N)

    def add(r, c_, v):
        rows.append(r)
        cols.append(c_)
        vals.append(v)

    add(idx_rho, idx_rho,
        2.0 * inv_cdt + (eps / dx) * (alpha_p + alpha_m)
        + 2.0 * sigma_eff - 2.0 * sigma_eff**2 * emis / a_e)
    add(idx_psi, idx_psi, inv_cdt + it.sigma)
    rhs[idx_rho] = inv_cdt * base.psi[:, 0] + sigma_eff * emis * b_e / a_e
    rhs[idx_psi] = inv_cdt * base.psi[:, 1] - eps * div_old1

    periodic = ctx.bc.kind == "periodic"
    jp = np.arange(1, N + 1)
    jm = np.arange(-1, N - 1)
    if periodic:
        jp, jm = jp % N, jm % N
        mask_p = np.ones(N, dtype=bool)
        mask_m = np.ones(N, dtype=bool)
    else:
        mask_p = jp < N
        mask_m = jm >= 0

    add(idx_rho[mask_p], 2 * jp[mask_p], -(eps / dx) * alpha_p[mask_p])
    add(idx_rho[mask_m], 2 * jm[mask_m], -(eps / dx) * alpha_m[mask_m])
    add(idx_rho[mask_p], 2 * jp[mask_p] + 1, np.full(mask_p.sum(), eps / (2.0 * dx)))
    add(idx_rho[mask_m], 2 * jm[mask_m] + 1, np.full(mask_m.sum(), -eps / (2.0 * dx)))
    add(idx_psi[mask_p], 2 * jp[mask_p], np.full(mask_p.sum(), eps / (3.0 * dx)))
    add(idx_psi[mask_m], 2 * jm[mask_m], np.full(mask_m.sum(), -eps / (3.0 * dx)))

    if not periodic:
        # half-range upwind boundary fluxes: psi_0 and psi_1 parts implicit,
        # higher-moment tails lagged at the odd iterate, ghosts are data
        M = it.psi.shape[1] - 1
        HL, HR = ctx.half_range_matrices(M)
        ghost_l, ghost_r = boundary_ghost_moments(ctx.bc, ctx.params, M)
        e_dx = eps / dx
        for l, idx_row in ((0, idx_rho), (1, idx_psi)):
            tail_l = HR[l, 2:] @ it.psi[0, 2:]
            tail_r = HL[l, 2:] @ it.psi[-1, 2:]
            add(np.array([idx_row[0]]), np.array([idx_rho[0]]),
                np.array([-e_dx * 2.0 * HR[l, 0]]))
            add(np.array([idx_row[0]]), np.array([idx_psi[0]]),
                np.array([-e_dx * HR[l, 1]]))
            rhs[idx_row[0]] += e_dx * (HL[l] @ ghost_l + tail_l)
            add(np.array([idx_row[-1]]), np.array([idx_rho[-1]]),
                np.array([e_dx * 2.0 * HL[l, 0]]))
            add(np.array([idx_row[-1]]), np.array([idx_psi[-1]]),
                np.array([e_dx * HL[l, 1]]))
            rhs[idx_row[-1]] -= e_dx * (HR[l] @ ghost_r + tail_r)

    sol = solve_sparse_system(2 * N, rows, cols, vals, rhs, bandwidth=3)
    rho, psi1 = sol[idx_rho], sol[idx_psi]

    T_e = (b_e + 2.0 * sigma_eff * rho) / a_e
    T_i = ion_after_relaxation(T_e, base.T_i, ckappa_eff=ckappa_eff, C_vi=C_vi,
                               eps=eps, dt=dt, ion_rhs=ion_rhs)
    # iterate safeguard: a transient nonpositive iterate (possible while the
    # lagged coefficients still whiplash) is pulled halfway back toward the
    # previous positive iterate; the converged fixed point is unaffected
    T_e = np.where(T_e > 0.0, T_e, 0.5 * it.T_e)
    T_i = np.where(T_i > 0.0, T_i, 0.5 * it.T_i)
    sigma_new = ctx.sigma_cells(T_e)
    alpha_new = interface_alpha(ctx, T_e)

    psi_new = np.empty_like(it.psi)
    psi_new[:, 0] = 2.0 * rho
    psi_new[:, 1] = psi1
    psi_new = _sweep_moments(ctx, psi_new, sigma_new, alpha_new,
                             iv_recon, iv_const, alpha, it.psi,
                             base.psi, dt, start_l=2)
    return Iterate(psi=psi_new, T_e=T_e, T_i=T_i, sigma=sigma_new)


def micro_step(ctx: SolverContext, state: MomentState, dt: float,
               control: IterationControl) -> tuple[MomentState, int]:
    """Advance the transport half by one implicit step of size dt."""
    base = Iterate(psi=state.psi, T_e=state.T_e, T_i=state.T_i,
                   sigma=ctx.sigma_cells(state.T_e))
    current = base.copy()
    iters = 0
    prev_err = math.inf
    while True:
        odd = micro_odd_sweep(ctx, base, current, dt)
        even = micro_even_solve(ctx, base, odd, dt)
        iters += 2
        err = micro_error(even.psi, even.T_e, even.T_i,
                          current.psi, current.T_e, current.T_i, dt, ctx.grid.dx)
        current = even
        if not math.isfinite(err):
            raise SolverError(f"transport iteration diverged at t={state.t}")
        if iteration_converged(err, prev_err, control.tol):
            break
        prev_err = err
        if iters >= control.max_iters:
            raise SolverError(
                f"transport iteration did not converge at t={state.t}: "
                f"residual {err:.3e} after {iters} iterations"
            )
    control.last_error = err
    control.iters_used = iters
    return MomentState(psi=current.psi, T_e=current.T_e, T_i=current.T_i, t=state.t), iters
