"""Small deterministic linear-algebra helpers."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import SolverError


def solve_structured(n: int, rows, cols, vals, rhs: np.ndarray,
                     bandwidth: int) -> np.ndarray:
    """Solve A x = rhs for a banded matrix with optional periodic corners.

    A is given in COO pieces (duplicates are summed); entries within
    ``bandwidth`` of the diagonal go into LAPACK band storage, the few
    wrap-around corner entries are folded in by a Sherman-Morrison-Woodbury
    correction (one extra column per corner entry in a single banded solve).
    """
    rows = np.concatenate([np.atleast_1d(np.asarray(r, dtype=np.int64)) for r in rows])
    cols = np.concatenate([np.atleast_1d(np.asarray(c, dtype=np.int64)) for c in cols])
    vals = np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in vals])

    if n <= 64:
        # tiny systems go dense: wrap-around corners can rival the band there,
        # which makes the low-rank correction ill-conditioned
        A = np.zeros((n, n))
        np.add.at(A, (rows, cols), vals)
        try:
            x = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"dense system solve failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise SolverError("dense system solve produced non-finite values")
        return x

    offs = rows - cols
    in_band = np.abs(offs) <= bandwidth
    ab = np.zeros((2 * bandwidth + 1, n))
    np.add.at(ab, (bandwidth + offs[in_band], cols[in_band]), vals[in_band])

    corner_r = rows[~in_band]
    corner_c = cols[~in_band]
    corner_v = vals[~in_band]
    k = corner_r.size
    try:
        if k == 0:
            x = sla.solve_banded((bandwidth, bandwidth), ab, rhs,
                                 overwrite_ab=True, check_finite=False)
        else:
            B = np.empty((n, 1 + k))
            B[:, 0] = rhs
            B[:, 1:] = 0.0
            B[corner_r, 1 + np.arange(k)] = corner_v
            Z = sla.solve_banded((bandwidth, bandwidth), ab, B,
                                 overwrite_ab=True, check_finite=False)
            y, W = Z[:, 0], Z[:, 1:]
            cap = np.eye(k) + W[corner_c, :]
            x = y - W @ np.linalg.solve(cap, y[corner_c])
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SolverError(f"banded system solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("banded system solve produced non-finite values")
    return x


def solve_sparse_system(n: int, rows, cols, vals, rhs: np.ndarray,
                        bandwidth: int | None = None) -> np.ndarray:
    """Backward-compatible wrapper; infers a bandwidth when none is given."""
    if bandwidth is None:
        r = np.concatenate([np.atleast_1d(np.asarray(v, dtype=np.int64)) for v in rows])
        c = np.concatenate([np.atleast_1d(np.asarray(v, dtype=np.int64)) for v in cols])
        offs = np.abs(r - c)
        interior = offs < n // 2 if n > 4 else np.ones_like(offs, dtype=bool)
        bandwidth = int(offs[interior].max()) if np.any(interior) else 1
    return solve_structured(n, rows, cols, vals, rhs, bandwidth)


def solve_tridiagonal(lower, diag, upper, rhs, corner_ul=0.0, corner_lr=0.0):
    """Solve a tridiagonal system, optionally with periodic corner entries.

    ``lower[j]`` multiplies x_{j-1} in row j and ``upper[j]`` multiplies
    x_{j+1} (lower[0] and upper[-1] are ignored unless folded into the
    corners).  ``corner_ul`` couples row 0 to the last unknown, ``corner_lr``
    the last row to the first; they are handled by Sherman-Morrison-Woodbury.
    """
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    if corner_ul == 0.0 and corner_lr == 0.0:
        x = sla.solve_banded((1, 1), ab, rhs, overwrite_ab=True, check_finite=False)
    else:
        B = np.zeros((n, 3))
        B[:, 0] = rhs
        B[0, 1] = corner_ul
        B[-1, 2] = corner_lr
        Z = sla.solve_banded((1, 1), ab, B, overwrite_ab=True, check_finite=False)
        y, W = Z[:, 0], Z[:, 1:]
        idx = np.array([n - 1, 0])
        cap = np.eye(2) + W[idx, :]
        x = y - W @ np.linalg.solve(cap, y[idx])
    if not np.all(np.isfinite(x)):
        raise SolverError("tridiagonal solve produced non-finite values")
    return x
