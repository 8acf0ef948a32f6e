"""Legendre expansion machinery: P_l recurrence, streaming matrices, quadrature.

The slab-geometry moment hierarchy couples psi_l to psi_{l-1} and psi_{l+1}
with coefficients l/(2l+1) and (l+1)/(2l+1).  The matrices A and B collect
those couplings for the tail moments (psi_2..psi_M): row r (1-based) holds the
equation for psi_{r+1}; A carries the lower-neighbor coupling, B the upper.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


def lower_coef(l: int) -> float:
    """Coupling of psi_l to d(psi_{l-1})/dx."""
    return l / (2.0 * l + 1.0)


def upper_coef(l: int) -> float:
    """Coupling of psi_l to d(psi_{l+1})/dx."""
    return (l + 1.0) / (2.0 * l + 1.0)


@dataclass(frozen=True)
class PnOperators:
    """Streaming matrices of the truncated moment system.

    A, B are (M-1) x (M+1), acting on u = (psi_0, ..., psi_M).  Nonzeros, in
    the 1-based subscript convention of the hierarchy:
    A[l-1, l] = l/(2l+1) for l = 2..M and B[l-1, l+2] = (l+1)/(2l+1) for
    l = 2..M-1; all other entries are exactly zero.
    """

    M: int
    A: np.ndarray
    B: np.ndarray


def pn_operators(M: int) -> PnOperators:
    if M < 2:
        raise ConfigurationError(f"expansion order must be >= 2, got {M}")
    A = np.zeros((M - 1, M + 1))
    B = np.zeros((M - 1, M + 1))
    for l in range(2, M + 1):
        A[l - 2, l - 1] = lower_coef(l)
    for l in range(2, M):
        B[l - 2, l + 1] = upper_coef(l)
    return PnOperators(M=M, A=A, B=B)


def legendre(l: int, mu):
    """P_l(mu) by the three-term recurrence; exact for l = 0, 1."""
    if l < 0:
        raise ConfigurationError("Legendre degree must be >= 0")
    mu = np.asarray(mu, dtype=float)
    p_prev = np.ones_like(mu)
    if l == 0:
        return p_prev
    p = mu.copy()
    for k in range(1, l):
        p, p_prev = ((2 * k + 1) * mu * p - k * p_prev) / (k + 1), p
    return p


def legendre_table(max_degree: int, mu) -> np.ndarray:
    """Stack P_0..P_max_degree evaluated at mu; shape (max_degree+1, len(mu))."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    table = np.empty((max_degree + 1, mu.size))
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = mu
    for k in range(1, max_degree):
        table[k + 1] = ((2 * k + 1) * mu * table[k] - k * table[k - 1]) / (k + 1)
    return table


@dataclass(frozen=True)
class Quadrature:
    """Gauss-Legendre nodes/weights on [-1, 1]; weights sum to 2."""

    mu: np.ndarray
    w: np.ndarray

    @property
    def n(self) -> int:
        return self.mu.size


def gauss_legendre(n: int) -> Quadrature:
    if n < 2:
        raise ConfigurationError("quadrature needs at least 2 nodes")
    mu, w = np.polynomial.legendre.leggauss(n)
    return Quadrature(mu=mu, w=w)


def project_to_moments(values: np.ndarray, quad: Quadrature, M: int) -> np.ndarray:
    """Moments psi_l = sum_m w_m P_l(mu_m) psi(mu_m) along the last axis.

    values has shape (..., n); the result has shape (..., M+1).  Requires
    quadrature order >= M+1 so degree-M integrands are exact.
    """
    if quad.n < M + 1:
        raise ConfigurationError(f"quadrature order {quad.n} insufficient for M = {M}")
    table = legendre_table(M, quad.mu)
    return np.asarray(values) @ (quad.w * table).T


def moments_to_intensity(moments: np.ndarray, mu) -> np.ndarray:
    """Evaluate sum_l (2l+1)/2 psi_l P_l(mu); inverse of project_to_moments."""
    moments = np.asarray(moments, dtype=float)
    M = moments.shape[-1] - 1
    table = legendre_table(M, mu)
    scale = (2.0 * np.arange(M + 1) + 1.0) / 2.0
    return (moments * scale) @ table


def half_range_flux_matrices(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Upwind (kinetic) interface-flux matrices for moment vectors.

    The exact flux of the equation for psi_l is int mu P_l(mu) psi dmu.  At a
    boundary interface the integrand is split by sign of mu: incoming
    directions carry the left state, outgoing the right state, each state
    reconstructed from its moment vector.  Returns (HL, HR) with

        F_l = (HL @ u_left)_l + (HR @ u_right)_l,

    where HL integrates over mu in (0, 1] and HR over [-1, 0).  The half-range
    integrals are evaluated with a Gauss rule that is exact for the polynomial
    integrands; HL + HR reproduces the full-range coupling coefficients.
    """
    n = M + 2
    t, wt = np.polynomial.legendre.leggauss(n)
    mu = 0.5 * (t + 1.0)
    w = 0.5 * wt
    table = legendre_table(M, mu)
    scale = (2.0 * np.arange(M + 1) + 1.0) / 2.0
    HL = np.einsum("m,lm,km->lk", w * mu, table, table) * scale[None, :]
    parity = (-1.0) ** (np.arange(M + 1)[:, None] + np.arange(M + 1)[None, :])
    HR = -parity * HL
    return HL, HR
