"""Shared independent oracles for the test suite.

These deliberately avoid the solver code paths they check: the quartic oracle
is plain bisection, the ODE oracles are dense closed-form or sub-stepped
solves, and norms are summed directly.
"""
from __future__ import annotations

import numpy as np


def bisect_quartic_root(C4, C1, C0, tol=1e-13, max_iter=300):
    """Unique positive root of C4 t^4 + C1 t + C0 = 0 by plain bisection."""

    def f(t):
        return C4 * t**4 + C1 * t + C0

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e150:
            raise RuntimeError("bisection bracket failed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(hi, 1.0):
            break
    return 0.5 * (lo + hi)


def relaxation_2x2_backward_euler(Te0, Ti0, C_ve, C_vi, ckap_half, eps, dt):
    """Closed-form backward-Euler step of the pure electron-ion relaxation.

        eps^2 C_ve (Te' - Te0)/dt = ckap_half (Ti' - Te')
        eps^2 C_vi (Ti' - Ti0)/dt = ckap_half (Te' - Ti')
    """
    ae = eps**2 * C_ve / dt
    ai = eps**2 * C_vi / dt
    A = np.array([[ae + ckap_half, -ckap_half],
                  [-ckap_half, ai + ckap_half]])
    b = np.array([ae * Te0, ai * Ti0])
    Te, Ti = np.linalg.solve(A, b)
    return Te, Ti


def homogeneous_even_4x4(rho_n, Te_n, Ti_n, T_lin, sigma, C_ve, C_vi, kappa,
                         eps, c, a, dt, w_sigma=0.5, w_kappa=0.5):
    """Dense solve of the linearized homogeneous even-stage equations.

    Unknowns (rho, psi1, Te, Ti); emission linearized as a c T_lin^3 Te.
    With zero gradients psi1 decouples and stays at its Euler-relaxed value.
    """
    s = w_sigma * sigma
    k = w_kappa * c * kappa
    A = np.zeros((4, 4))
    b = np.zeros(4)
    # rho row: (2 eps^2/(c dt))(rho - rho_n) = -s (2 rho - a c T_lin^3 Te)
    A[0, 0] = 2 * eps**2 / (c * dt) + 2 * s
    A[0, 2] = -s * a * c * T_lin**3
    b[0] = 2 * eps**2 / (c * dt) * rho_n
    # psi1 row (zero initial, zero gradients)
    A[1, 1] = eps**2 / (c * dt) + sigma
    b[1] = 0.0
    # Te row
    A[2, 2] = eps**2 * C_ve / dt + k + s * a * c * T_lin**3
    A[2, 3] = -k
    A[2, 0] = -2 * s
    b[2] = eps**2 * C_ve / dt * Te_n
    # Ti row
    A[3, 3] = eps**2 * C_vi / dt + k
    A[3, 2] = -k
    b[3] = eps**2 * C_vi / dt * Ti_n
    return np.linalg.solve(A, b)


def macro_ode_substepped(rho0, Te0, Ti0, params_tuple, q_rates, dt, n_sub,
                         w_sigma=0.5, w_kappa=0.5):
    """Sub-stepped backward Euler on the macroscopic ODE system (no conduction).

    Each tiny step solves the nonlinear cell system by fixed-point iteration;
    with n_sub large this approximates the exact flow of

        (2 eps^2/c) rho_t = -w_s sigma(Te) (2 rho - a c Te^4) + Q_r
        eps^2 C_ve(Te) Te_t = w_k c kap(Te) (Ti - Te)
                              + w_s sigma(Te) (2 rho - a c Te^4) + Q_e
        eps^2 C_vi Ti_t = w_k c kap(Te) (Te - Ti) + Q_i
    """
    eps, c, a, sigma_of, cve_of, cvi_of, kap_of = params_tuple
    Qr, Qe, Qi = q_rates
    h = dt / n_sub
    rho, Te, Ti = rho0, Te0, Ti0
    for _ in range(n_sub):
        rho_new, Te_new, Ti_new = rho, Te, Ti
        for _ in range(200):
            s = w_sigma * sigma_of(Te_new)
            k = w_kappa * c * kap_of(Te_new)
            C_ve = cve_of(Te_new)
            C_vi = cvi_of(Ti_new)
            rho_next = (rho + h * c / (2 * eps**2)
                        * (s * a * c * Te_new**4 + Qr)) / (1 + h * c * s / eps**2)
            Te_next = (Te + h / (eps**2 * C_ve)
                       * (k * Ti_new + s * (2 * rho_next - a * c * Te_new**4)
                          + s * a * c * Te_new**4 * 0.0 + Qe)) / (1 + h * k / (eps**2 * C_ve))
            # recompute emission against the fresh Te via one scalar Newton
            for _ in range(60):
                f = eps**2 * C_ve * (Te_next - Te) / h - k * (Ti_new - Te_next) \
                    - s * (2 * rho_next - a * c * Te_next**4) - Qe
                df = eps**2 * C_ve / h + k + 4 * s * a * c * Te_next**3
                step = f / df
                Te_next -= step
                if abs(step) < 1e-15 * max(Te_next, 1e-15):
                    break
            Ti_next = (Ti + h * (k * Te_next + Qi) / (eps**2 * C_vi)) / (
                1 + h * k / (eps**2 * C_vi))
            change = max(abs(rho_next - rho_new), abs(Te_next - Te_new),
                         abs(Ti_next - Ti_new))
            rho_new, Te_new, Ti_new = rho_next, Te_next, Ti_next
            if change < 1e-14 * max(1.0, Te_new):
                break
        rho, Te, Ti = rho_new, Te_new, Ti_new
    return rho, Te, Ti
