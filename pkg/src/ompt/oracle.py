"""Brute-force ground truth for tiny instances.

Exact l0 minimization by support enumeration, and the 2k-column
full-rank (spark) condition that certifies uniqueness of k-sparse
representations.  Everything here is exponential by design and guarded
by an explicit budget; it exists to validate the solvers, not to scale.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationBudgetExceededError, KOutOfRangeError
from .linalg import Dictionary, SparseSignal, SupportSet

ORACLE_BUDGET = 1_000_000
DEFAULT_TOL = 1e-9
_SPARK_SV_TOL = 1e-10
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class OracleSolution:
    """Result of exact l0 minimization.

    ``signal`` is None (and sparsity -1) when no support within the size
    budget represents f to tolerance; ``unique`` means no other support of
    the same size achieves the tolerance.
    """

    signal: SparseSignal | None
    unique: bool
    sparsity: int
    residual_norm: float


def _check_budget(d: int, k: int) -> None:
    count = math.comb(d, k)
    if count > ORACLE_BUDGET:
        raise EnumerationBudgetExceededError(d, k, count, ORACLE_BUDGET)


def sparsest_solution(
    dictionary: Dictionary, f, k_max: int, tol: float = DEFAULT_TOL
) -> OracleSolution:
    """Solve min ||a||_0 subject to Phi a ~ f by exhaustive enumeration.

    Supports are visited by size then lexicographically; the first support
    of the minimal size whose least-squares residual is within
    ``tol * ||f||`` is the certificate.  All supports of that size are then
    checked to decide uniqueness.
    """
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    d = dictionary.cols
    if not 1 <= k_max <= d:
        raise KOutOfRangeError(f"k_max must satisfy 1 <= k_max <= d, got {k_max}")
    _check_budget(d, k_max)
    fnorm = float(np.linalg.norm(f))
    if fnorm == 0.0:
        # the zero signal: sparsity 0, trivially unique
        return OracleSolution(
            signal=_zero_signal(d), unique=True, sparsity=0, residual_norm=0.0
        )
    phi = dictionary.entries
    best_residual = fnorm
    for size in range(1, k_max + 1):
        _check_budget(d, size)
        hits: list[tuple[tuple[int, ...], np.ndarray, float]] = []
        for support in itertools.combinations(range(d), size):
            sub = phi[:, support]
            coef, *_ = np.linalg.lstsq(sub, f, rcond=None)
            residual = float(np.linalg.norm(f - sub @ coef))
            best_residual = min(best_residual, residual)
            if residual <= tol * fnorm:
                hits.append((support, coef, residual))
                if len(hits) > 1:
                    break  # uniqueness already decided
        if hits:
            support, coef, residual = hits[0]
            keep = coef != 0.0
            signal = SparseSignal(
                d,
                SupportSet(tuple(np.asarray(support)[keep].tolist())),
                coef[keep],
            )
            return OracleSolution(
                signal=signal,
                unique=len(hits) == 1,
                sparsity=size,
                residual_norm=residual,
            )
    return OracleSolution(
        signal=None, unique=False, sparsity=-1, residual_norm=best_residual
    )


def _zero_signal(d: int) -> SparseSignal:
    return SparseSignal(d, SupportSet(()), np.zeros(0))


def verify_spark_condition(dictionary: Dictionary, k: int) -> bool:
    """True iff every 2k-column submatrix has full rank.

    This is the uniqueness condition for k-sparse representations: checked
    by the smallest singular value of each stacked submatrix.
    """
    d, n = dictionary.cols, dictionary.rows
    if k < 1:
        raise KOutOfRangeError(f"k must be >= 1, got {k}")
    if 2 * k > n:
        raise KOutOfRangeError(f"need 2k <= n, got 2k = {2 * k} > n = {n}")
    if 2 * k > d:
        raise KOutOfRangeError(f"need 2k <= d, got 2k = {2 * k} > d = {d}")
    _check_budget(d, 2 * k)
    phi = dictionary.entries
    it = itertools.combinations(range(d), 2 * k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return True
        subsets = np.asarray(block, dtype=np.int64)
        stacked = phi[:, subsets].transpose(1, 0, 2)  # (N, n, 2k)
        smallest = np.linalg.svd(stacked, compute_uv=False)[:, -1]
        if np.any(smallest <= _SPARK_SV_TOL):
            return False
