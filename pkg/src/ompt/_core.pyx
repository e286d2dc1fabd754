# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled solver kernels.

Mirrors ``_kernels_py`` exactly: same counter-based scan permutations,
same incremental QR with one reorthogonalization pass, same stop codes
and per-evaluation inner-product counting.  The dictionary is taken
Fortran-ordered so each atom is a contiguous column.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

from .errors import RankDeficientError

cnp.import_array()

BACKEND_NAME = "cython"

cdef int _RESIDUAL = 0
cdef int _NO_INDEX = 1
cdef int _MAX_ITER = 2

STOP_RESIDUAL = _RESIDUAL
STOP_NO_INDEX = _NO_INDEX
STOP_MAX_ITER = _MAX_ITER

DEF QR_RANK_TOL = 1e-10

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef unsigned long long ITER_KEY = 0xD1B54A32D192ED03ULL


cdef inline unsigned long long _splitmix_next(unsigned long long* state) noexcept nogil:
    cdef unsigned long long z
    state[0] = state[0] + GOLDEN
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef void _fill_permutation(
    long long* perm,
    unsigned long long seed,
    unsigned long long iteration,
    Py_ssize_t d,
) noexcept nogil:
    cdef unsigned long long state = seed ^ (iteration * ITER_KEY)
    cdef Py_ssize_t i, j
    cdef long long tmp
    for i in range(d):
        perm[i] = i
    for i in range(d - 1, 0, -1):
        j = <Py_ssize_t>(_splitmix_next(&state) % <unsigned long long>(i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


def scan_permutation(seed, iteration, d):
    """Permutation of range(d) for (seed, iteration); matches ompt._rng."""
    cdef Py_ssize_t dd = d
    if dd <= 0:
        raise ValueError("d must be positive")
    out = np.empty(dd, dtype=np.int64)
    cdef long long[::1] view = out
    _fill_permutation(&view[0], <unsigned long long>seed, <unsigned long long>iteration, dd)
    return out


cdef inline double _column_dot(const double* col, const double* v, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += col[i] * v[i]
    return acc


cdef inline double _norm(const double* v, Py_ssize_t n) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += v[i] * v[i]
    return sqrt(acc)


cdef int _qr_append(
    const double* column,
    double* q,          # (max_cols, n) row-major: row j is orthonormal vector j
    double* r,          # (max_cols, max_cols) row-major upper triangular
    double* beta,
    double* residual,
    double* work,
    Py_ssize_t n,
    Py_ssize_t max_cols,
    Py_ssize_t s,
    double* rnorm_out,
) noexcept nogil:
    """Append a column at position s; returns 0, or 1 on rank deficiency."""
    cdef Py_ssize_t i, j
    cdef double h, rho, b
    for i in range(n):
        work[i] = column[i]
    for j in range(s):
        h = _column_dot(&q[j * n], work, n)
        r[j * max_cols + s] = h
        for i in range(n):
            work[i] -= h * q[j * n + i]
    for j in range(s):
        h = _column_dot(&q[j * n], work, n)
        r[j * max_cols + s] += h
        for i in range(n):
            work[i] -= h * q[j * n + i]
    rho = _norm(work, n)
    if rho < QR_RANK_TOL:
        return 1
    for i in range(n):
        q[s * n + i] = work[i] / rho
    r[s * max_cols + s] = rho
    b = _column_dot(&q[s * n], residual, n)
    beta[s] = b
    for i in range(n):
        residual[i] -= b * q[s * n + i]
    rnorm_out[0] = _norm(residual, n)
    return 0


cdef _solve_upper(double[:, ::1] r, double[::1] beta, Py_ssize_t s):
    out = np.zeros(s)
    cdef double[::1] x = out
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(s - 1, -1, -1):
        acc = beta[i]
        for j in range(i + 1, s):
            acc -= r[i, j] * x[j]
        x[i] = acc / r[i, i]
    return out


def ompt_kernel(phi, f, double t, seed, bint fixed_scan, max_iter, double stop_ratio):
    """Thresholding pursuit; see the Python kernel for the full contract."""
    cdef const double[::1, :] phi_v = np.asfortranarray(phi, dtype=np.float64)
    cdef const double[::1] f_v = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n = phi_v.shape[0]
    cdef Py_ssize_t d = phi_v.shape[1]
    cdef Py_ssize_t cap = max_iter
    if cap > n:
        cap = n  # QR cannot extend past n independent columns

    q_arr = np.zeros((cap, n))
    r_arr = np.zeros((cap, cap))
    beta_arr = np.zeros(cap)
    resid_arr = np.array(f_v, dtype=np.float64, copy=True)
    work_arr = np.empty(n)
    perm_arr = np.empty(d, dtype=np.int64)
    support_arr = np.empty(cap, dtype=np.int64)
    selected_arr = np.zeros(d, dtype=np.uint8)
    norms_arr = np.empty(cap + 1)

    cdef double[:, ::1] q = q_arr
    cdef double[:, ::1] r = r_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] residual = resid_arr
    cdef double[::1] work = work_arr
    cdef long long[::1] perm = perm_arr
    cdef long long[::1] support = support_arr
    cdef unsigned char[::1] selected = selected_arr
    cdef double[::1] norms = norms_arr

    cdef unsigned long long seed_c = <unsigned long long>seed
    cdef double fnorm = _norm(&residual[0], n)
    cdef double stop_level = stop_ratio * fnorm
    cdef double rnorm = fnorm
    cdef double accept, ip
    cdef Py_ssize_t s = 0, pos, idx, found
    cdef long long count = 0
    cdef int stop_code = _RESIDUAL
    cdef int rank_flag = 0

    norms[0] = fnorm
    with nogil:
        while rnorm > stop_level:
            if s == cap:
                stop_code = _MAX_ITER
                break
            if not fixed_scan:
                _fill_permutation(&perm[0], seed_c, <unsigned long long>s, d)
            accept = t * rnorm
            found = -1
            for pos in range(d):
                idx = perm[pos] if not fixed_scan else pos
                if selected[idx]:
                    continue
                count += 1
                ip = _column_dot(&phi_v[0, idx], &residual[0], n)
                if fabs(ip) >= accept:
                    found = idx
                    break
            if found < 0:
                stop_code = _NO_INDEX
                break
            rank_flag = _qr_append(
                &phi_v[0, found], &q[0, 0], &r[0, 0], &beta[0],
                &residual[0], &work[0], n, cap, s, &rnorm,
            )
            if rank_flag:
                break
            selected[found] = 1
            support[s] = found
            s += 1
            norms[s] = rnorm

    if rank_flag:
        raise RankDeficientError(
            f"selected column is within {QR_RANK_TOL} of the current span"
        )
    coefficients = _solve_upper(r, beta, s)
    return (
        support_arr[:s].copy(),
        coefficients,
        norms_arr[: s + 1].copy(),
        int(count),
        stop_code,
    )


def omp_kernel(phi, f, k_stop, double residual_tol):
    """Greedy baseline; see the Python kernel for the full contract."""
    cdef const double[::1, :] phi_v = np.asfortranarray(phi, dtype=np.float64)
    cdef const double[::1] f_v = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t n = phi_v.shape[0]
    cdef Py_ssize_t d = phi_v.shape[1]
    cdef Py_ssize_t cap = k_stop

    q_arr = np.zeros((cap, n))
    r_arr = np.zeros((cap, cap))
    beta_arr = np.zeros(cap)
    resid_arr = np.array(f_v, dtype=np.float64, copy=True)
    work_arr = np.empty(n)
    support_arr = np.empty(cap, dtype=np.int64)
    selected_arr = np.zeros(d, dtype=np.uint8)
    norms_arr = np.empty(cap + 1)

    cdef double[:, ::1] q = q_arr
    cdef double[:, ::1] r = r_arr
    cdef double[::1] beta = beta_arr
    cdef double[::1] residual = resid_arr
    cdef double[::1] work = work_arr
    cdef long long[::1] support = support_arr
    cdef unsigned char[::1] selected = selected_arr
    cdef double[::1] norms = norms_arr

    cdef double fnorm = _norm(&residual[0], n)
    cdef double stop_level = residual_tol * fnorm
    cdef double rnorm = fnorm
    cdef double best, ip
    cdef Py_ssize_t s = 0, idx, best_idx
    cdef long long count = 0
    cdef int stop_code = _MAX_ITER
    cdef int rank_flag = 0

    norms[0] = fnorm
    with nogil:
        while s < cap:
            if rnorm <= stop_level:
                stop_code = _RESIDUAL
                break
            best = -1.0
            best_idx = -1
            for idx in range(d):
                if selected[idx]:
                    continue
                count += 1
                ip = fabs(_column_dot(&phi_v[0, idx], &residual[0], n))
                if ip > best:  # strict: ties resolve to the lower index
                    best = ip
                    best_idx = idx
            rank_flag = _qr_append(
                &phi_v[0, best_idx], &q[0, 0], &r[0, 0], &beta[0],
                &residual[0], &work[0], n, cap, s, &rnorm,
            )
            if rank_flag:
                break
            selected[best_idx] = 1
            support[s] = best_idx
            s += 1
            norms[s] = rnorm

    if rank_flag:
        raise RankDeficientError(
            f"selected column is within {QR_RANK_TOL} of the current span"
        )
    cdef Py_ssize_t size = s
    coefficients = _solve_upper(r, beta, size)
    return (
        support_arr[:size].copy(),
        coefficients,
        norms_arr[: size + 1].copy(),
        int(count),
        stop_code,
    )
