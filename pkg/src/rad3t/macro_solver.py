"""Macroscopic half of the splitting: stiff relaxation with nonlinear conduction.

The odd stage treats conduction explicitly at the previous iterate and solves
the same cell-local quartic as the transport half, with the conduction values
and the external sources folded into the constant term.  The even stage
linearizes the emission about the odd iterate, eliminates rho cellwise, and
solves one block-tridiagonal parabolic system coupling (T_e, T_i) with
implicit conduction (lagged coefficients) and implicit electron-ion coupling.
Moments psi_1..psi_M pass through unchanged.
"""
from __future__ import annotations

import math

import numpy as np

from .context import SolverContext
from .errors import SolverError
from .grid import MomentState, extend_cell_field
from .linalg import solve_sparse_system
from .micro_solver import (IterationControl, Iterate, QuarticCoefficients,
                           energy_lag_gap, ion_after_relaxation,
                           iteration_converged, relaxation_quartic,
                           rho_after_relaxation, solve_unique_positive_root)
from .physics import conduction_coeff, source_rates
from .spatial import conduction_apply, face_average


def _ghost_T(ctx: SolverContext, T: np.ndarray, species_index: int) -> np.ndarray:
    if ctx.bc.kind == "periodic":
        return extend_cell_field(T, ctx.bc, 1)
    return extend_cell_field(T, ctx.bc, 1,
                             ctx.bc.left[species_index], ctx.bc.right[species_index])


def _conduction_faces(ctx: SolverContext, T_e, T_i):
    """Face-averaged diffusion coefficients from ghost-extended temperatures."""
    Te_g = _ghost_T(ctx, T_e, 0)
    Ti_g = _ghost_T(ctx, T_i, 1)
    De_face = face_average(conduction_coeff("e", Te_g, ctx.params))
    Di_face = face_average(conduction_coeff("i", Ti_g, ctx.params))
    return Te_g, Ti_g, De_face, Di_face


def macro_error(Te_a, Ti_a, Te_b, Ti_b, dt, dx) -> float:
    """Temperature-only residual of one macroscopic iteration pair, over dt."""
    acc = (Te_a - Te_b) ** 2 + (Ti_a - Ti_b) ** 2
    return float(np.sqrt(dx * np.sum(acc)) / dt)


def macro_odd_local(ctx: SolverContext, base: Iterate, it: Iterate, dt: float,
                    q_rates) -> Iterate:
    """Cellwise quartic stage with conduction explicit at the previous iterate.

    Cells where the explicit conduction source breaks the quartic's
    admissibility (possible during violent front transients) are recomputed
    with the stencil diagonal implicit and only the nonnegative neighbor
    inflow lagged; that variant keeps the constant term negative for any step
    size and expresses the same equation at convergence.
    """
    params = ctx.params
    eps, c, a = params.epsilon, params.c, params.a
    dx2 = ctx.grid.dx ** 2
    w = ctx.macro_weights
    Q_r, Q_e, Q_i = q_rates

    Te_g, Ti_g, De_face, Di_face = _conduction_faces(ctx, it.T_e, it.T_i)
    C_ve, C_vi, kappa = ctx.material_lag(it.T_e, it.T_i)
    sigma_eff = w.sigma * it.sigma
    ckappa_eff = w.kappa * c * kappa
    gap_e = eps**2 * energy_lag_gap(ctx.params.C_ve_model, C_ve, it.T_e, base.T_e) / dt
    gap_i = eps**2 * energy_lag_gap(ctx.params.C_vi_model, C_vi, it.T_i, base.T_i) / dt

    def solve_stage(elec_rhs, ion_rhs, elec_damp, ion_damp, rescue):
        coeffs = relaxation_quartic(
            0.5 * base.psi[:, 0], base.T_e, base.T_i,
            sigma_eff=sigma_eff, ckappa_eff=ckappa_eff, C_ve=C_ve, C_vi=C_vi,
            eps=eps, c=c, a=a, dt=dt,
            rho_rhs=Q_r, elec_rhs=elec_rhs, ion_rhs=ion_rhs,
            elec_damp=elec_damp, ion_damp=ion_damp,
        )
        admissible = coeffs.C0 < 0.0
        if rescue:
            coeffs = QuarticCoefficients(coeffs.C4, coeffs.C1,
                                         np.where(admissible, coeffs.C0, -1.0))
        T_e = solve_unique_positive_root(coeffs)
        T_i = ion_after_relaxation(T_e, base.T_i, ckappa_eff=ckappa_eff, C_vi=C_vi,
                                   eps=eps, dt=dt, ion_rhs=ion_rhs, ion_damp=ion_damp)
        return T_e, T_i, admissible & (T_i > 0.0)

    def damped_terms():
        damp_e = (De_face[1:] + De_face[:-1]) / dx2
        damp_i = (Di_face[1:] + Di_face[:-1]) / dx2
        nbr_e = (De_face[1:] * Te_g[2:] + De_face[:-1] * Te_g[:-2]) / dx2
        nbr_i = (Di_face[1:] * Ti_g[2:] + Di_face[:-1] * Ti_g[:-2]) / dx2
        return (eps**2 * nbr_e + Q_e - gap_e, eps**2 * nbr_i + Q_i - gap_i,
                damp_e, damp_i)

    G_e = conduction_apply(De_face, Te_g, ctx.grid.dx)
    G_i = conduction_apply(Di_face, Ti_g, ctx.grid.dx)
    T_e, T_i, ok = solve_stage(eps**2 * G_e + Q_e - gap_e,
                               eps**2 * G_i + Q_i - gap_i,
                               0.0, 0.0, rescue=True)
    if not np.all(ok):
        T_e_d, T_i_d, ok_d = solve_stage(*damped_terms(), rescue=False)
        if not np.all(ok_d[~ok]):
            bad = int(np.where(~ok & ~ok_d)[0][0])
            raise SolverError(f"macroscopic odd stage inadmissible at cell {bad}")
        T_e = np.where(ok, T_e, T_e_d)
        T_i = np.where(ok, T_i, T_i_d)

    rho = rho_after_relaxation(T_e**4, 0.5 * base.psi[:, 0], sigma_eff=sigma_eff,
                               eps=eps, c=c, a=a, dt=dt, rho_rhs=Q_r)
    psi = it.psi.copy()
    psi[:, 0] = 2.0 * rho
    return Iterate(psi=psi, T_e=T_e, T_i=T_i, sigma=ctx.sigma_cells(T_e))


def macro_even_parabolic(ctx: SolverContext, base: Iterate, it: Iterate, dt: float,
                         q_rates) -> Iterate:
    """Coupled (T_e, T_i) parabolic solve with implicit lagged-coefficient conduction."""
    params = ctx.params
    eps, c, a = params.epsilon, params.c, params.a
    dx = ctx.grid.dx
    N = ctx.grid.n
    w = ctx.macro_weights
    Q_r, Q_e, Q_i = q_rates

    _, _, De_face, Di_face = _conduction_faces(ctx, it.T_e, it.T_i)
    C_ve, C_vi, kappa = ctx.material_lag(it.T_e, it.T_i)
    sigma_eff = w.sigma * it.sigma
    ckappa_eff = w.kappa * c * kappa
    gap_e = energy_lag_gap(ctx.params.C_ve_model, C_ve, it.T_e, base.T_e) / dt
    gap_i = energy_lag_gap(ctx.params.C_vi_model, C_vi, it.T_i, base.T_i) / dt
    denom_rho = eps**2 + sigma_eff * c * dt
    emis = a * c * it.T_e**3

    # row scale: both equations divided by eps^2
    kap = ckappa_eff / eps**2
    emission_diag = sigma_eff * emis / denom_rho
    rho_rhs_term = sigma_eff * (base.psi[:, 0] + c * dt * Q_r / eps**2) / denom_rho

    idx_e = 2 * np.arange(N)
    idx_i = idx_e + 1
    rows, cols, vals = [], [], []
    rhs = np.zeros(2 * N)

    def add(r, c_, v):
        rows.append(r)
        cols.append(c_)
        vals.append(v)

    De_p, De_m = De_face[1:], De_face[:-1]
    Di_p, Di_m = Di_face[1:], Di_face[:-1]
    inv_dx2 = 1.0 / dx**2

    diag_e = C_ve / dt + kap + emission_diag + (De_p + De_m) * inv_dx2
    diag_i = C_vi / dt + kap + (Di_p + Di_m) * inv_dx2
    add(idx_e, idx_e, diag_e)
    add(idx_i, idx_i, diag_i)
    add(idx_e, idx_i, -kap * np.ones(N))
    add(idx_i, idx_e, -kap * np.ones(N))
    rhs[idx_e] = C_ve * base.T_e / dt + rho_rhs_term + Q_e / eps**2 - gap_e
    rhs[idx_i] = C_vi * base.T_i / dt + Q_i / eps**2 - gap_i

    # diagonal dominance of the 2x2 diagonal blocks (conduction rows sum to zero)
    slack_e = diag_e - kap - (De_p + De_m) * inv_dx2
    slack_i = diag_i - kap - (Di_p + Di_m) * inv_dx2
    if np.any(slack_e <= 0.0) or np.any(slack_i <= 0.0):
        raise SolverError("parabolic system lost diagonal dominance")

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

    add(idx_e[mask_p], 2 * jp[mask_p], -De_p[mask_p] * inv_dx2)
    add(idx_e[mask_m], 2 * jm[mask_m], -De_m[mask_m] * inv_dx2)
    add(idx_i[mask_p], 2 * jp[mask_p] + 1, -Di_p[mask_p] * inv_dx2)
    add(idx_i[mask_m], 2 * jm[mask_m] + 1, -Di_m[mask_m] * inv_dx2)

    if not periodic:
        rhs[idx_e[0]] += De_m[0] * inv_dx2 * ctx.bc.left[0]
        rhs[idx_e[-1]] += De_p[-1] * inv_dx2 * ctx.bc.right[0]
        rhs[idx_i[0]] += Di_m[0] * inv_dx2 * ctx.bc.left[1]
        rhs[idx_i[-1]] += Di_p[-1] * inv_dx2 * ctx.bc.right[1]

    sol = solve_sparse_system(2 * N, rows, cols, vals, rhs, bandwidth=2)
    T_e, T_i = sol[idx_e], sol[idx_i]
    if np.any(T_e <= 0.0) or np.any(T_i <= 0.0):
        bad = int(np.argmin(np.minimum(T_e, T_i)))
        raise SolverError(f"nonpositive temperature after parabolic stage at cell {bad}")

    rho = rho_after_relaxation(emis / (a * c) * T_e, 0.5 * base.psi[:, 0],
                               sigma_eff=sigma_eff, eps=eps, c=c, a=a, dt=dt,
                               rho_rhs=Q_r)
    psi = it.psi.copy()
    psi[:, 0] = 2.0 * rho
    return Iterate(psi=psi, T_e=T_e, T_i=T_i, sigma=ctx.sigma_cells(T_e))


def macro_step(ctx: SolverContext, state: MomentState, dt: float,
               control: IterationControl, t_source: float) -> tuple[MomentState, int]:
    """Advance the macroscopic half by one implicit step of size dt.

    Sources are evaluated once at ``t_source`` and held fixed across the
    iterations.  Starts with the paired odd/even alternation; if the residual
    fails to contract (violent conduction fronts), restarts with plain Picard
    iterations on the implicit even stage alone, whose converged state solves
    the same equations.  Moments of order >= 1 return bit-identical.
    """
    q_rates = source_rates(ctx.sources, t_source)
    base = Iterate(psi=state.psi, T_e=state.T_e, T_i=state.T_i,
                   sigma=ctx.sigma_cells(state.T_e))
    has_conduction = ctx.params.K_e > 0.0 or ctx.params.K_i > 0.0
    modes = (True, False) if (control.prefer_picard and has_conduction) else (False, True)
    err = math.inf
    iters = 0
    current = base
    for attempt, picard_only in enumerate(modes):
        final_attempt = attempt == len(modes) - 1 or not has_conduction
        current = base.copy()
        iters = 0
        first_err = None
        prev_err = math.inf
        failed = False
        while True:
            try:
                if picard_only:
                    even = macro_even_parabolic(ctx, base, current, dt, q_rates)
                else:
                    odd = macro_odd_local(ctx, base, current, dt, q_rates)
                    even = macro_even_parabolic(ctx, base, odd, dt, q_rates)
            except SolverError:
                if final_attempt:
                    raise
                failed = True
                break
            iters += 2 if not picard_only else 1
            err = macro_error(even.T_e, even.T_i, current.T_e, current.T_i, dt, ctx.grid.dx)
            current = even
            if not math.isfinite(err):
                if final_attempt:
                    raise SolverError(f"macroscopic iteration diverged at t={state.t}")
                failed = True
                break
            if iteration_converged(err, prev_err, control.tol):
                break
            prev_err = err
            first_err = err if first_err is None else first_err
            if not final_attempt and iters >= 8 and err > control.tol:
                # abort early when the projected count cannot meet the cap
                rate = (err / first_err) ** (1.0 / max(iters - 1, 1))
                hopeless = rate >= 1.0 or iters + math.log(control.tol / err) / math.log(rate) \
                    > control.max_iters
                if hopeless:
                    failed = True
                    break
            if iters >= control.max_iters:
                if final_attempt:
                    raise SolverError(
                        f"macroscopic iteration did not converge at t={state.t}: "
                        f"residual {err:.3e} after {iters} iterations")
                failed = True
                break
        if not failed:
            control.prefer_picard = picard_only
            break
    control.last_error = err
    control.iters_used = iters
    psi = state.psi.copy()
    psi[:, 0] = current.psi[:, 0]
    return MomentState(psi=psi, T_e=current.T_e, T_i=current.T_i, t=state.t), iters
