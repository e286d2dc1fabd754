"""Pure-Python solver kernels (fallback when the compiled core is absent).

Semantics are identical to the compiled kernels in ``_core``: same scan
permutations (shared counter-based construction), same incremental-QR
update with one reorthogonalization pass, same stop codes and
instrumentation.  Inner products during the scan are evaluated one atom
at a time so the early-exit count is honest.
"""

import numpy as np

from ._rng import scan_permutation
from .errors import RankDeficientError

BACKEND_NAME = "python"

STOP_RESIDUAL = 0
STOP_NO_INDEX = 1
STOP_MAX_ITER = 2

_QR_RANK_TOL = 1e-10


class _IncrementalQR:
    """Thin QR of the selected columns, one appended column per iteration.

    Maintains the residual of f against the current span; modified
    Gram-Schmidt with a second pass keeps the residual orthogonal to the
    selected atoms to near machine precision.
    """

    def __init__(self, f: np.ndarray, max_cols: int):
        n = f.shape[0]
        self.q = np.zeros((max_cols, n))
        self.r = np.zeros((max_cols, max_cols))
        self.beta = np.zeros(max_cols)
        self.residual = f.copy()
        self.size = 0

    def append(self, column: np.ndarray) -> float:
        """Add a column; returns the new residual norm."""
        s = self.size
        w = column.copy()
        q = self.q[:s]
        h = q @ w if s else 0.0
        if s:
            w -= q.T @ h
            h2 = q @ w
            w -= q.T @ h2
            self.r[:s, s] = h + h2
        rho = float(np.linalg.norm(w))
        if rho < _QR_RANK_TOL:
            raise RankDeficientError(
                f"selected column is within {_QR_RANK_TOL} of the current span"
            )
        w /= rho
        self.q[s] = w
        self.r[s, s] = rho
        b = float(w @ self.residual)
        self.beta[s] = b
        self.residual -= b * w
        self.size = s + 1
        return float(np.linalg.norm(self.residual))

    def solve(self) -> np.ndarray:
        """Back-substitute R x = beta for the selected-column coefficients."""
        s = self.size
        x = np.zeros(s)
        for i in range(s - 1, -1, -1):
            x[i] = (self.beta[i] - self.r[i, i + 1 : s] @ x[i + 1 : s]) / self.r[i, i]
        return x


def ompt_kernel(phi, f, t, seed, fixed_scan, max_iter, stop_ratio):
    """Thresholding pursuit; returns (support, coefficients, residual_norms,
    inner_product_count, stop_code).

    Loop: while ||r_s|| > stop_ratio * ||f||, scan atoms in permuted (or
    ascending) order and accept the first not-yet-selected index with
    |<r_s, phi_i>| >= t ||r_s||; a full scan without acceptance stops with
    STOP_NO_INDEX.  Already-selected indices are skipped without counting.
    """
    n, d = phi.shape
    max_iter = min(max_iter, n)  # QR cannot extend past n independent columns
    fnorm = float(np.linalg.norm(f))
    stop_level = stop_ratio * fnorm
    qr = _IncrementalQR(np.asarray(f, dtype=np.float64), max_iter)
    rnorm = fnorm
    residual_norms = [fnorm]
    support: list[int] = []
    selected = np.zeros(d, dtype=bool)
    count = 0
    stop_code = STOP_RESIDUAL
    while rnorm > stop_level:
        if len(support) == max_iter:
            stop_code = STOP_MAX_ITER
            break
        order = (
            range(d)
            if fixed_scan
            else scan_permutation(seed, len(support), d)
        )
        accept = t * rnorm
        found = -1
        r = qr.residual
        for idx in order:
            idx = int(idx)
            if selected[idx]:
                continue
            count += 1
            if abs(float(phi[:, idx] @ r)) >= accept:
                found = idx
                break
        if found < 0:
            stop_code = STOP_NO_INDEX
            break
        rnorm = qr.append(phi[:, found])
        selected[found] = True
        support.append(found)
        residual_norms.append(rnorm)
    coefficients = qr.solve()
    return (
        np.asarray(support, dtype=np.int64),
        coefficients,
        np.asarray(residual_norms),
        count,
        stop_code,
    )


def omp_kernel(phi, f, k_stop, residual_tol):
    """Greedy pursuit baseline; same result tuple as :func:`ompt_kernel`.

    Each iteration evaluates the residual against every not-yet-selected
    atom (all counted), picks the max-magnitude index with ties to the
    lower index, and projects.  Stops after ``k_stop`` iterations or when
    ||r_s|| <= residual_tol * ||f||.
    """
    n, d = phi.shape
    fnorm = float(np.linalg.norm(f))
    stop_level = residual_tol * fnorm
    qr = _IncrementalQR(np.asarray(f, dtype=np.float64), k_stop)
    rnorm = fnorm
    residual_norms = [fnorm]
    support: list[int] = []
    remaining = np.arange(d, dtype=np.int64)
    count = 0
    stop_code = STOP_MAX_ITER
    for _ in range(k_stop):
        if rnorm <= stop_level:
            stop_code = STOP_RESIDUAL
            break
        products = phi[:, remaining].T @ qr.residual
        count += remaining.shape[0]
        pos = int(np.argmax(np.abs(products)))  # first max -> lowest index
        idx = int(remaining[pos])
        rnorm = qr.append(phi[:, idx])
        support.append(idx)
        remaining = np.delete(remaining, pos)
        residual_norms.append(rnorm)
    coefficients = qr.solve()
    return (
        np.asarray(support, dtype=np.int64),
        coefficients,
        np.asarray(residual_norms),
        count,
        stop_code,
    )
