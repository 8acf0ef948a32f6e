"""Scalar fast path for spatially homogeneous runs (fluxes and conduction vanish).

Mirrors the array solvers exactly: the same alternating odd/even iterations,
the same lagged coefficients, the same stopping residual (with dx*sum over
identical cells collapsing to the domain length).  Used for the homogeneous
benchmark problems whose reference solutions need millions of tiny steps.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=False)
def _coef(base, expo, T):
    if expo == 0.0:
        return base
    return base * T**expo


@njit(cache=False)
def _cv_integral(base, expo, T):
    return base * T ** (expo + 1.0) / (expo + 1.0)


@njit(cache=False)
def _energy_gap(base, expo, C_lag, T_lag, T_base):
    if expo == 0.0:
        return 0.0
    return (_cv_integral(base, expo, T_lag) - _cv_integral(base, expo, T_base)
            - C_lag * (T_lag - T_base))


@njit(cache=False)
def _sources_at(t, src):
    """src rows: (target, amplitude, t_w, t_c, rho_bar, sign); returns (Q_r, Q_e, Q_i)."""
    Qr = 0.0
    Qe = 0.0
    Qi = 0.0
    for k in range(src.shape[0]):
        amp = src[k, 1]
        t_w = src[k, 2]
        t_c = src[k, 3]
        rho_bar = src[k, 4]
        q = rho_bar * amp / (np.sqrt(2.0 * np.pi) * t_w) * np.exp(
            src[k, 5] * (t - t_c) ** 2 / (2.0 * t_w**2)
        )
        tgt = src[k, 0]
        if tgt == 0.0:
            Qr += q
        elif tgt == 1.0:
            Qe += q
        else:
            Qi += q
    return Qr, Qe, Qi


@njit(cache=False)
def _quartic_root(C4, C1, C0, tol):
    upper = -C0 / C1
    if C4 > 0.0:
        cap = (-C0 / C4) ** 0.25
        if cap < upper:
            upper = cap
    lo = 0.0
    hi = upper
    T = 0.5 * hi
    for _ in range(200):
        fT = C4 * T**4 + C1 * T + C0
        if fT < 0.0:
            lo = T
        elif fT > 0.0:
            hi = T
        T_new = T - fT / (4.0 * C4 * T**3 + C1)
        if T_new <= lo or T_new >= hi:
            T_new = 0.5 * (lo + hi)
        if abs(T_new - T) <= tol * max(T_new, tol):
            return T_new
        T = T_new
    return T


@njit(cache=False)
def _micro_step(rho_n, Te_n, Ti_n, dt, L, eps, c, a, w_s, w_k,
                sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
                tol, max_iters, qtol):
    rho_k, Te_k, Ti_k = rho_n, Te_n, Ti_n
    iters = 0
    prev_err = np.inf
    while True:
        # odd stage: cell-local quartic with rho and T_i eliminated
        s_eff = w_s * _coef(sig_b, sig_e, Te_k)
        ck_eff = w_k * c * _coef(kap_b, kap_e, Te_k)
        C_ve = _coef(cve_b, cve_e, Te_k)
        C_vi = _coef(cvi_b, cvi_e, Ti_k)
        gap_e = _energy_gap(cve_b, cve_e, C_ve, Te_k, Te_n)
        gap_i = _energy_gap(cvi_b, cvi_e, C_vi, Ti_k, Ti_n)
        den_r = eps**2 + s_eff * c * dt
        den_i = eps**2 * C_vi + ck_eff * dt
        C4 = s_eff * a * c * dt / den_r
        C1 = C_ve + ck_eff * dt * C_vi / den_i
        C0 = -C_ve * Te_n - ck_eff * dt * (C_vi * Ti_n - gap_i) / den_i \
            - s_eff * dt * 2.0 * rho_n / den_r + gap_e
        Te_o = _quartic_root(C4, C1, C0, qtol)
        rho_o = (2.0 * eps**2 * rho_n + s_eff * a * c**2 * dt * Te_o**4) / (2.0 * den_r)
        Ti_o = (eps**2 * C_vi * Ti_n - eps**2 * gap_i + ck_eff * dt * Te_o) / den_i

        # even stage: linearized emission, scalar (rho, T_e) solve
        s_eff = w_s * _coef(sig_b, sig_e, Te_o)
        ck_eff = w_k * c * _coef(kap_b, kap_e, Te_o)
        C_ve = _coef(cve_b, cve_e, Te_o)
        C_vi = _coef(cvi_b, cvi_e, Ti_o)
        gap_e = _energy_gap(cve_b, cve_e, C_ve, Te_o, Te_n)
        gap_i = _energy_gap(cvi_b, cvi_e, C_vi, Ti_o, Ti_n)
        den_i = eps**2 * C_vi + ck_eff * dt
        inv_cdt = eps**2 / (c * dt)
        emis = a * c * Te_o**3
        a_e = eps**2 * C_ve / dt + ck_eff * eps**2 * C_vi / den_i + s_eff * emis
        b_e = eps**2 * C_ve * Te_n / dt - eps**2 * gap_e / dt \
            + ck_eff * eps**2 * (C_vi * Ti_n - gap_i) / den_i
        diag = 2.0 * inv_cdt + 2.0 * s_eff - 2.0 * s_eff**2 * emis / a_e
        rho_e = (inv_cdt * 2.0 * rho_n + s_eff * emis * b_e / a_e) / diag
        Te_e = (b_e + 2.0 * s_eff * rho_e) / a_e
        Ti_e = (eps**2 * C_vi * Ti_n - eps**2 * gap_i + ck_eff * dt * Te_e) / den_i
        if Te_e <= 0.0:
            Te_e = 0.5 * Te_o
        if Ti_e <= 0.0:
            Ti_e = 0.5 * Ti_o

        iters += 2
        err = np.sqrt(L * (2.0 * (2.0 * rho_e - 2.0 * rho_k) ** 2
                           + (Te_e - Te_k) ** 2 + (Ti_e - Ti_k) ** 2)) / dt
        rho_k, Te_k, Ti_k = rho_e, Te_e, Ti_e
        if err < tol or (err <= 1.0e3 * tol
                         and 0.25 * prev_err <= err <= 4.0 * prev_err):
            return rho_k, Te_k, Ti_k, iters, 0
        prev_err = err
        if iters >= max_iters:
            return rho_k, Te_k, Ti_k, iters, 1


@njit(cache=False)
def _macro_step(rho_s, Te_s, Ti_s, dt, t_src, L, eps, c, a, w_s, w_k,
                sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
                src, tol, max_iters, qtol):
    Qr, Qe, Qi = _sources_at(t_src, src)
    rho_k, Te_k, Ti_k = rho_s, Te_s, Ti_s
    iters = 0
    prev_err = np.inf
    while True:
        # odd stage
        s_eff = w_s * _coef(sig_b, sig_e, Te_k)
        ck_eff = w_k * c * _coef(kap_b, kap_e, Te_k)
        C_ve = _coef(cve_b, cve_e, Te_k)
        C_vi = _coef(cvi_b, cvi_e, Ti_k)
        gap_e = _energy_gap(cve_b, cve_e, C_ve, Te_k, Te_s)
        gap_i = _energy_gap(cvi_b, cvi_e, C_vi, Ti_k, Ti_s)
        den_r = eps**2 + s_eff * c * dt
        den_i = eps**2 * C_vi + ck_eff * dt
        C4 = s_eff * a * c * dt / den_r
        C1 = C_ve + ck_eff * dt * C_vi / den_i
        C0 = -C_ve * Te_s \
            - ck_eff * dt * (C_vi * Ti_s + dt * Qi / eps**2 - gap_i) / den_i \
            - s_eff * dt * (2.0 * rho_s + c * dt * Qr / eps**2) / den_r \
            - dt * Qe / eps**2 + gap_e
        Te_o = _quartic_root(C4, C1, C0, qtol)
        Ti_o = (eps**2 * C_vi * Ti_s + dt * Qi - eps**2 * gap_i
                + ck_eff * dt * Te_o) / den_i

        # even stage: 2x2 (T_e, T_i) solve with linearized emission
        s_eff = w_s * _coef(sig_b, sig_e, Te_o)
        ck_eff = w_k * c * _coef(kap_b, kap_e, Te_o)
        C_ve = _coef(cve_b, cve_e, Te_o)
        C_vi = _coef(cvi_b, cvi_e, Ti_o)
        gap_e = _energy_gap(cve_b, cve_e, C_ve, Te_o, Te_s)
        gap_i = _energy_gap(cvi_b, cvi_e, C_vi, Ti_o, Ti_s)
        den_r = eps**2 + s_eff * c * dt
        emis = a * c * Te_o**3
        kap = ck_eff / eps**2
        A11 = C_ve / dt + kap + s_eff * emis / den_r
        A12 = -kap
        A22 = C_vi / dt + kap
        b1 = C_ve * Te_s / dt + s_eff * (2.0 * rho_s + c * dt * Qr / eps**2) / den_r \
            + Qe / eps**2 - gap_e / dt
        b2 = C_vi * Ti_s / dt + Qi / eps**2 - gap_i / dt
        det = A11 * A22 - A12 * A12
        Te_e = (b1 * A22 - A12 * b2) / det
        Ti_e = (A11 * b2 - A12 * b1) / det
        rho_e = (2.0 * eps**2 * rho_s + s_eff * a * c**2 * dt * Te_o**3 * Te_e
                 + c * dt * Qr) / (2.0 * den_r)

        iters += 2
        err = np.sqrt(L * ((Te_e - Te_k) ** 2 + (Ti_e - Ti_k) ** 2)) / dt
        rho_k, Te_k, Ti_k = rho_e, Te_e, Ti_e
        if err < tol or (err <= 1.0e3 * tol
                         and 0.25 * prev_err <= err <= 4.0 * prev_err):
            return rho_k, Te_k, Ti_k, iters, 0
        prev_err = err
        if iters >= max_iters:
            return rho_k, Te_k, Ti_k, iters, 1


@njit(cache=False)
def run_segment(rho, Te, Ti, t0, dt, n_steps, use_midpoint, L, eps, c, a,
                ws_mi, wk_mi, ws_ma, wk_ma,
                sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
                src, tol, max_iters, qtol, series):
    """Advance n_steps of size dt; series rows get (micro_iters, macro_iters, E).

    Returns (rho, Te, Ti, status) with status 0 on success, 1 on iteration
    failure, 2 when a midpoint extrapolation had to fall back (recorded, not
    fatal).
    """
    status = 0
    t = t0
    for step in range(n_steps):
        if use_midpoint:
            # macro half over [t, t+dt/2]: backward Euler at dt/4, extrapolate
            r1, e1, i1, ma1, f1 = _macro_step(rho, Te, Ti, 0.25 * dt, t + 0.25 * dt,
                                              L, eps, c, a, ws_ma, wk_ma,
                                              sig_b, sig_e, cve_b, cve_e,
                                              cvi_b, cvi_e, kap_b, kap_e,
                                              src, tol, max_iters, qtol)
            r1, e1, i1 = 2.0 * r1 - rho, 2.0 * e1 - Te, 2.0 * i1 - Ti
            ok = f1 == 0 and r1 > 0.0 and e1 > 0.0 and i1 > 0.0
            mi1 = 0
            if ok:
                r2, e2, i2, mi1, f2 = _micro_step(r1, e1, i1, 0.5 * dt, L, eps, c, a,
                                                  ws_mi, wk_mi, sig_b, sig_e,
                                                  cve_b, cve_e, cvi_b, cvi_e,
                                                  kap_b, kap_e, tol, max_iters, qtol)
                r2, e2, i2 = 2.0 * r2 - r1, 2.0 * e2 - e1, 2.0 * i2 - i1
                ok = f2 == 0 and r2 > 0.0 and e2 > 0.0 and i2 > 0.0
            if ok:
                r3, e3, i3, ma2, f3 = _macro_step(r2, e2, i2, 0.25 * dt, t + 0.75 * dt,
                                                  L, eps, c, a, ws_ma, wk_ma,
                                                  sig_b, sig_e, cve_b, cve_e,
                                                  cvi_b, cvi_e, kap_b, kap_e,
                                                  src, tol, max_iters, qtol)
                r3, e3, i3 = 2.0 * r3 - r2, 2.0 * e3 - e2, 2.0 * i3 - i2
                ok = f3 == 0 and r3 > 0.0 and e3 > 0.0 and i3 > 0.0
            if ok:
                rho, Te, Ti = r3, e3, i3
                micro_iters = mi1
                macro_iters = ma1 + ma2
            else:
                status = 2
                rho, Te, Ti, micro_iters, macro_iters, fail = _be_step(
                    rho, Te, Ti, t, dt, L, eps, c, a, ws_mi, wk_mi, ws_ma, wk_ma,
                    sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
                    src, tol, max_iters, qtol)
                if fail != 0:
                    return rho, Te, Ti, 1
        else:
            rho, Te, Ti, micro_iters, macro_iters, fail = _be_step(
                rho, Te, Ti, t, dt, L, eps, c, a, ws_mi, wk_mi, ws_ma, wk_ma,
                sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
                src, tol, max_iters, qtol)
            if fail != 0:
                return rho, Te, Ti, 1
        t = t0 + (step + 1) * dt
        if series.shape[0] > step:
            E = L * (_cv_integral(cve_b, cve_e, Te) + _cv_integral(cvi_b, cvi_e, Ti)
                     + 2.0 * rho / c)
            series[step, 0] = micro_iters
            series[step, 1] = macro_iters
            series[step, 2] = E
    return rho, Te, Ti, status


@njit(cache=False)
def _be_step(rho, Te, Ti, t, dt, L, eps, c, a, ws_mi, wk_mi, ws_ma, wk_ma,
             sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e, kap_b, kap_e,
             src, tol, max_iters, qtol):
    rho, Te, Ti, mi, f1 = _micro_step(rho, Te, Ti, dt, L, eps, c, a, ws_mi, wk_mi,
                                      sig_b, sig_e, cve_b, cve_e, cvi_b, cvi_e,
                                      kap_b, kap_e, tol, max_iters, qtol)
    if f1 != 0:
        return rho, Te, Ti, mi, 0, 1
    rho, Te, Ti, ma, f2 = _macro_step(rho, Te, Ti, dt, t + dt, L, eps, c, a,
                                      ws_ma, wk_ma, sig_b, sig_e, cve_b, cve_e,
                                      cvi_b, cvi_e, kap_b, kap_e,
                                      src, tol, max_iters, qtol)
    return rho, Te, Ti, mi, ma, (0 if f2 == 0 else 1)
