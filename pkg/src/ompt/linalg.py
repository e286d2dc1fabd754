"""Dense linear-algebra kernels and the core domain types.

Everything here is plain double-precision dense algebra: column
normalization, Gram matrices, restricted least squares, and the two
operator norms (spectral and the induced inf->2 mixed norm) that the
sensing-matrix metrics are defined through.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionTooLargeError,
    IoError,
    NotSymmetricError,
    RankDeficientError,
    ZeroColumnError,
)

#: Columns below this norm cannot be normalized.
ZERO_COLUMN_TOL = 1e-14
#: Smallest singular value under which a restricted system is rank deficient.
RANK_TOL = 1e-10
#: Maximum asymmetry accepted by :func:`spectral_norm`.
SYMMETRY_TOL = 1e-10
#: Sign-vector enumeration cap for :func:`mixed_norm_inf_2` (cost 2^m).
MIXED_NORM_DIM_CAP = 25
#: Unit-column tolerance enforced by :class:`Dictionary`.
UNIT_COLUMN_TOL = 1e-12


def _as_matrix(matrix) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class Dictionary:
    """An n x d sensing matrix with unit-norm columns (the atoms).

    The entry array is stored Fortran-ordered (column-contiguous) and
    marked read-only; instances are safe to share across threads.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _as_matrix(self.entries)
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("dictionary must have at least one row and column")
        if not np.all(np.isfinite(a)):
            raise ValueError("dictionary entries must be finite")
        norms = np.linalg.norm(a, axis=0)
        bad = np.abs(norms - 1.0) > UNIT_COLUMN_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValueError(
                f"column {i} has norm {norms[i]!r}; columns must be unit norm "
                f"within {UNIT_COLUMN_TOL} (use normalize_columns first)"
            )
        a = np.asfortranarray(a)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def atom(self, i: int) -> np.ndarray:
        """Column i as a read-only view."""
        return self.entries[:, i]

    def submatrix(self, support: "SupportSet") -> np.ndarray:
        """Columns restricted to a support, in support order."""
        return self.entries[:, support.as_array()]


@dataclass(frozen=True)
class SupportSet:
    """An ordered set of atom indices; order records selection order."""

    indices: tuple[int, ...]

    def __init__(self, indices):
        ids = tuple(int(i) for i in indices)
        if any(i < 0 for i in ids):
            raise ValueError("support indices must be nonnegative")
        if len(set(ids)) != len(ids):
            raise ValueError("support indices must be distinct")
        object.__setattr__(self, "indices", ids)
        object.__setattr__(self, "_lookup", frozenset(ids))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i) -> bool:
        return i in self._lookup

    def as_set(self) -> frozenset:
        return self._lookup

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)

    def check_bounds(self, d: int) -> None:
        if self.indices and max(self.indices) >= d:
            raise ValueError(f"support index {max(self.indices)} >= d = {d}")


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """A length-``dim`` vector given by its support and nonzero values."""

    dim: int
    support: SupportSet
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if len(vals) != len(self.support):
            raise ValueError("one value per support index required")
        if np.any(vals == 0.0):
            raise ValueError("sparse signal values must be nonzero")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sparse signal values must be finite")
        self.support.check_bounds(self.dim)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        """Sparsity (number of nonzeros)."""
        return len(self.support)

    @property
    def a_min(self) -> float:
        """Least nonzero magnitude."""
        if self.k == 0:
            raise ValueError("a_min is undefined for the zero signal")
        return float(np.min(np.abs(self.values)))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.support.as_array()] = self.values
        return dense


def normalize_columns(matrix) -> Dictionary:
    """Scale each column to unit l2 norm, preserving direction."""
    a = _as_matrix(matrix)
    norms = np.linalg.norm(a, axis=0)
    small = norms < ZERO_COLUMN_TOL
    if np.any(small):
        raise ZeroColumnError(int(np.argmax(small)))
    return Dictionary(a / norms)


def gram(dictionary: Dictionary) -> np.ndarray:
    """Gram matrix G = Phi^T Phi of all pairwise atom inner products."""
    g = dictionary.entries.T @ dictionary.entries
    # Exact symmetry keeps downstream max/eig scans order-independent.
    return (g + g.T) / 2.0


def restricted_least_squares(
    dictionary: Dictionary, support: SupportSet, f
) -> np.ndarray:
    """Minimize ||f - Phi_S x|| over x for the columns in ``support``.

    Raises RankDeficientError when the restricted matrix has a singular
    value below RANK_TOL, which signals an ill-posed projection step.
    """
    f = np.asarray(f, dtype=np.float64).reshape(-1)
    if f.shape[0] != dictionary.rows:
        raise ValueError("signal length must equal the dictionary row count")
    support.check_bounds(dictionary.cols)
    if len(support) == 0:
        return np.zeros(0)
    sub = dictionary.submatrix(support)
    u, s, vt = np.linalg.svd(sub, full_matrices=False)
    if s[-1] < RANK_TOL:
        raise RankDeficientError(
            f"restricted matrix smallest singular value {s[-1]:.3e} < {RANK_TOL}"
        )
    return vt.T @ ((u.T @ f) / s)


def spectral_norm(matrix) -> float:
    """Largest absolute eigenvalue of a symmetric matrix (the 2->2 norm)."""
    a = _as_matrix(matrix)
    if a.shape[0] != a.shape[1]:
        raise NotSymmetricError("matrix must be square")
    if a.size and np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise NotSymmetricError(
            f"asymmetry {np.max(np.abs(a - a.T)):.3e} exceeds {SYMMETRY_TOL}"
        )
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh((a + a.T) / 2.0))))


def mixed_norm_inf_2(matrix) -> float:
    """Induced inf->2 operator norm, max_{||x||_inf = 1} ||Ax||_2.

    The objective is convex, so the maximum over the unit cube is attained
    at a vertex; enumerate all sign vectors (x and -x coincide, so only
    2^(m-1) candidates are evaluated, in chunks).
    """
    a = _as_matrix(matrix)
    if a.shape[0] != a.shape[1]:
        raise ValueError("mixed norm is defined here for square matrices")
    m = a.shape[0]
    if m > MIXED_NORM_DIM_CAP:
        raise DimensionTooLargeError(m, MIXED_NORM_DIM_CAP)
    if m == 0:
        return 0.0
    total = 1 << (m - 1)  # first coordinate fixed at +1
    best = 0.0
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        bits = (idx[:, None] >> np.arange(m - 1, dtype=np.uint64)) & 1
        signs = np.empty((len(idx), m))
        signs[:, 0] = 1.0
        signs[:, 1:] = 2.0 * bits - 1.0
        norms_sq = np.einsum("ij,ij->i", signs @ a.T, signs @ a.T)
        best = max(best, float(np.max(norms_sq)))
    return float(np.sqrt(best))


def min_singular_value(dictionary: Dictionary, support: SupportSet) -> float:
    """Smallest singular value of the column submatrix on ``support``."""
    support.check_bounds(dictionary.cols)
    if len(support) == 0:
        raise ValueError("support must be nonempty")
    if len(support) > dictionary.rows:
        return 0.0
    sub = dictionary.submatrix(support)
    return float(np.linalg.svd(sub, compute_uv=False)[-1])


def save_matrix_text(path, matrix) -> None:
    """Write a matrix as text: 'n d' header then n rows of d values.

    Values are emitted with 17 significant digits, which round-trips
    float64 exactly.
    """
    a = _as_matrix(matrix)
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"{a.shape[0]} {a.shape[1]}\n")
            for row in a:
                fh.write(" ".join(format(v, ".17g") for v in row))
                fh.write("\n")
    except OSError as exc:
        raise IoError(path, exc) from exc


def load_matrix_text(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix_text`."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except OSError as exc:
        raise IoError(path, exc) from exc
    tokens = text.split()
    if len(tokens) < 2:
        raise IoError(path, "missing 'n d' header")
    try:
        n, d = int(tokens[0]), int(tokens[1])
        values = [float(t) for t in tokens[2:]]
    except ValueError as exc:
        raise IoError(path, f"malformed numeric data ({exc})") from exc
    if n < 1 or d < 1:
        raise IoError(path, f"invalid dimensions {n} x {d}")
    if len(values) != n * d:
        raise IoError(path, f"expected {n * d} values, found {len(values)}")
    return np.array(values).reshape(n, d)
