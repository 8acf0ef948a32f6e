"""Interface reconstruction, stabilized moment fluxes, and the conduction stencil.

The two flux families mirror the structure of the moment hierarchy:

* old family (serves the d(psi_{l+1})/dx term in the equation for psi_l,
  l = 0..M-1):  (l+1)/(2l+1) * (psi_{l+1}^L + psi_{l+1}^R)/2
                - alpha/2 * (psi_l^R - psi_l^L)
* new family (serves the d(psi_{l-1})/dx term, l = 1..M):
  l/(2l+1) * (psi_{l-1}^L + psi_{l-1}^R)/2, with the l = M flux carrying the
  extra dissipation -alpha/2 * (psi_M^R - psi_M^L).

alpha = (c/eps^2) exp(-(sigma_j + sigma_{j+1}) / (2 eps^2)) is the stabilization
coefficient; it decays to zero in the optically thick / small-eps regime, which
is what keeps the scheme consistent with the diffusion limit on fixed meshes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import lower_coef, upper_coef
from .errors import ConfigurationError

#: smoothness floor in the WENO weights
WENO_EPS = 1.0e-6

#: ghost-cell requirement per reconstruction mode
GHOST_WIDTH = {"constant": 1, "linear_minmod": 2, "weno3": 2}

RECONSTRUCTION_MODES = tuple(GHOST_WIDTH)


def required_ghost_width(mode: str) -> int:
    try:
        return GHOST_WIDTH[mode]
    except KeyError:
        raise ConfigurationError(
            f"unknown reconstruction mode {mode!r}; valid: {sorted(GHOST_WIDTH)}"
        ) from None


@dataclass
class InterfaceValues:
    """Left/right traces at the N+1 interfaces of an N-cell interior."""

    uL: np.ndarray
    uR: np.ndarray


def _minmod(d_minus: np.ndarray, d_plus: np.ndarray) -> np.ndarray:
    same_sign = d_minus * d_plus > 0.0
    return np.where(same_sign, np.where(np.abs(d_minus) < np.abs(d_plus), d_minus, d_plus), 0.0)


def reconstruct(field: np.ndarray, mode: str) -> InterfaceValues:
    """Interface traces from a ghost-extended cell array.

    ``field`` holds N interior cells plus the mode's ghost width per side and
    may carry trailing axes (moment columns).  Interface k separates interior
    cells k-1 and k, k = 0..N.
    """
    w = required_ghost_width(mode)
    n = field.shape[0] - 2 * w
    if n < 1:
        raise ConfigurationError("field too short for the requested reconstruction")
    if mode == "constant":
        uL = field[w - 1 : w + n]
        uR = field[w : w + n + 1]
        return InterfaceValues(uL=np.array(uL, copy=True), uR=np.array(uR, copy=True))

    # Both remaining modes reconstruct per cell; every cell from the first left
    # ghost to the last right ghost owns a trace used by some interface.
    cells = field[w - 2 : w + n + 2]
    fm, f0, fp = cells[:-2], cells[1:-1], cells[2:]

    if mode == "linear_minmod":
        slope = _minmod(f0 - fm, fp - f0)
        as_left_state = f0 + 0.5 * slope
        as_right_state = f0 - 0.5 * slope
    else:
        # weno3: one-sided and centered candidate stencils blended by inverse
        # squared smoothness; constants reproduced exactly up to the eps floor.
        beta_minus = (f0 - fm) ** 2
        beta_plus = (fp - f0) ** 2
        wL1 = (1.0 / 3.0) / (WENO_EPS + beta_minus) ** 2
        wL2 = (2.0 / 3.0) / (WENO_EPS + beta_plus) ** 2
        as_left_state = (wL1 * (1.5 * f0 - 0.5 * fm) + wL2 * 0.5 * (f0 + fp)) / (wL1 + wL2)
        wR1 = (1.0 / 3.0) / (WENO_EPS + beta_plus) ** 2
        wR2 = (2.0 / 3.0) / (WENO_EPS + beta_minus) ** 2
        as_right_state = (wR1 * (1.5 * f0 - 0.5 * fp) + wR2 * 0.5 * (f0 + fm)) / (wR1 + wR2)

    # interface k gets its L trace from cell k-1 and its R trace from cell k
    uL = as_left_state[: n + 1]
    uR = as_right_state[1:]
    return InterfaceValues(uL=uL, uR=uR)


def alpha_coeff(sigma_left, sigma_right, eps: float, c: float):
    """Interface stabilization coefficient; underflows to 0 in the stiff limit."""
    return (c / eps**2) * np.exp(-(np.asarray(sigma_left) + np.asarray(sigma_right)) / (2.0 * eps**2))


def central_average(iv: InterfaceValues, l: int) -> np.ndarray:
    return 0.5 * (iv.uL[:, l] + iv.uR[:, l])


def jump(iv: InterfaceValues, l: int) -> np.ndarray:
    return iv.uR[:, l] - iv.uL[:, l]


def pn_interface_flux(kind: str, l: int, iv: InterfaceValues, alpha: np.ndarray, M: int) -> np.ndarray:
    """Per-interface flux of the requested family for moment index l."""
    if kind == "old_family":
        if not 0 <= l <= M - 1:
            raise ConfigurationError(f"old-family flux needs 0 <= l <= M-1, got l={l}")
        return upper_coef(l) * central_average(iv, l + 1) - 0.5 * alpha * jump(iv, l)
    if kind == "new_family":
        if not 1 <= l <= M:
            raise ConfigurationError(f"new-family flux needs 1 <= l <= M, got l={l}")
        flux = lower_coef(l) * central_average(iv, l - 1)
        if l == M:
            flux = flux - 0.5 * alpha * jump(iv, M)
        return flux
    raise ConfigurationError(f"unknown flux family {kind!r}")


def flux_divergence(flux: np.ndarray, dx: float) -> np.ndarray:
    """(F_{j+1/2} - F_{j-1/2}) / dx for the N interior cells."""
    return (flux[1:] - flux[:-1]) / dx


def face_average(cell_values: np.ndarray) -> np.ndarray:
    """Arithmetic face means of a width-1 ghosted cell array; returns N+1 faces."""
    return 0.5 * (cell_values[:-1] + cell_values[1:])


def conduction_apply(D_face: np.ndarray, T_ghosted: np.ndarray, dx: float) -> np.ndarray:
    """Cellwise value of d/dx (D dT/dx) with face-averaged coefficients.

    ``T_ghosted`` carries one ghost per side; ``D_face`` the matching N+1 faces.
    """
    grad = (T_ghosted[1:] - T_ghosted[:-1]) / dx
    return (D_face[1:] * grad[1:] - D_face[:-1] * grad[:-1]) / dx


def conduction_matrix(D_face: np.ndarray, dx: float):
    """Tridiagonal coefficients (lower, diag, upper) of the conduction stencil.

    Row j of the operator reads lower[j]*T_{j-1} + diag[j]*T_j + upper[j]*T_{j+1};
    interior row sums are zero.  Boundary closure (periodic wrap or ghost data)
    is the caller's responsibility.
    """
    inv = 1.0 / dx**2
    lower = D_face[:-1] * inv
    upper = D_face[1:] * inv
    diag = -(lower + upper)
    return lower, diag, upper
