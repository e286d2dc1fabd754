"""Sensing-matrix metrics: mutual coherence M, global 2-coherence nu_k,
cumulative coherence mu_{1,k}, the restricted isometry constant delta_k
(exhaustively), and the sharp selection metric omega_k.

The quantities are related (for k >= 1) by

    M <= nu_k <= delta_{k+1} <= sqrt(k) nu_k <= k M
    delta_{k+1} <= mu_{1,k} <= sqrt(k) nu_k

which the test suite exercises as properties.  delta_k and omega_k are
exponential to compute; both are gated behind an explicit subset budget
rather than approximated -- the guarantees they feed are exact statements
and only make sense with exact values at desk scale.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EnumerationBudgetExceededError,
    KOutOfRangeError,
    SingularSubsetError,
)
from .linalg import Dictionary, gram

#: Largest number of subsets delta_k / omega_k enumeration will visit per k.
SUBSET_BUDGET = 2_000_000
_CHUNK = 65_536
_SINGULAR_EIG_TOL = 1e-12


@dataclass(frozen=True)
class CoherenceReport:
    """Metric bundle for one dictionary, indexed k = 1..kmax.

    ``global2[k-1]`` holds nu_k and ``cumulative[k-1]`` holds mu_{1,k};
    ``ric`` and ``omega`` are present only when exhaustively computed.
    """

    mutual: float
    global2: tuple[float, ...]
    cumulative: tuple[float, ...]
    ric: tuple[float, ...] | None
    omega: tuple[float, ...] | None
    kmax: int

    def __post_init__(self):
        if self.kmax < 1:
            raise ValueError("kmax must be >= 1")
        for name in ("global2", "cumulative", "ric", "omega"):
            vec = getattr(self, name)
            if vec is not None and len(vec) != self.kmax:
                raise ValueError(f"{name} must have one entry per k = 1..kmax")

    def nu(self, k: int) -> float:
        return self.global2[self._idx(k)]

    def mu1(self, k: int) -> float:
        return self.cumulative[self._idx(k)]

    def delta(self, k: int) -> float:
        if self.ric is None:
            from .errors import MissingMetricError

            raise MissingMetricError("report was built without RIC values")
        return self.ric[self._idx(k)]

    def _idx(self, k: int) -> int:
        if not 1 <= k <= self.kmax:
            raise KOutOfRangeError(f"k = {k} outside report range 1..{self.kmax}")
        return k - 1

    def to_json(self) -> str:
        return json.dumps(
            {
                "mutual": self.mutual,
                "global2": list(self.global2),
                "cumulative": list(self.cumulative),
                "ric": None if self.ric is None else list(self.ric),
                "omega": None if self.omega is None else list(self.omega),
                "kmax": self.kmax,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CoherenceReport":
        obj = json.loads(text)
        return cls(
            mutual=float(obj["mutual"]),
            global2=tuple(obj["global2"]),
            cumulative=tuple(obj["cumulative"]),
            ric=None if obj["ric"] is None else tuple(obj["ric"]),
            omega=None if obj["omega"] is None else tuple(obj["omega"]),
            kmax=int(obj["kmax"]),
        )


def _check_k(k: int, d: int) -> None:
    if not 1 <= k <= d - 1:
        raise KOutOfRangeError(f"k must satisfy 1 <= k <= d-1 = {d - 1}, got {k}")


def _sorted_offdiag_rows(dictionary: Dictionary) -> np.ndarray:
    """|G_ij| per row with the diagonal dropped, sorted descending."""
    g = np.abs(gram(dictionary))
    d = dictionary.cols
    off = g[~np.eye(d, dtype=bool)].reshape(d, d - 1)
    off.sort(axis=1)
    return off[:, ::-1]


def mutual_coherence(dictionary: Dictionary) -> float:
    """M = max_{i != j} |<phi_i, phi_j>|."""
    if dictionary.cols < 2:
        raise KOutOfRangeError("mutual coherence needs at least two atoms")
    return float(np.max(_sorted_offdiag_rows(dictionary)[:, 0]))


def global_2_coherence(dictionary: Dictionary, k: int) -> float:
    """nu_k: max over atoms of the l2 norm of its k largest Gram entries.

    For each atom i the inner maximum over subsets picks the k largest
    squared off-diagonal Gram entries of row i, so the whole quantity is
    a row-wise top-k selection (polynomial time).  nu_1 equals M.
    """
    _check_k(k, dictionary.cols)
    rows = _sorted_offdiag_rows(dictionary)
    return float(np.sqrt(np.max(np.sum(rows[:, :k] ** 2, axis=1))))


def cumulative_coherence(dictionary: Dictionary, k: int) -> float:
    """mu_{1,k}: max over atoms of the l1 sum of its k largest Gram entries."""
    _check_k(k, dictionary.cols)
    rows = _sorted_offdiag_rows(dictionary)
    return float(np.max(np.sum(rows[:, :k], axis=1)))


def _subset_count(d: int, k: int) -> int:
    return math.comb(d, k)


def _check_budget(d: int, k: int, budget: int = SUBSET_BUDGET) -> None:
    count = _subset_count(d, k)
    if count > budget:
        raise EnumerationBudgetExceededError(d, k, count, budget)


def _subset_chunks(d: int, k: int):
    it = itertools.combinations(range(d), k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def ric_exact(dictionary: Dictionary, k: int) -> float:
    """delta_k = max over k-subsets S of || Phi_S^T Phi_S - I ||_{2,2}.

    Exhaustive over all C(d, k) subsets (eigenvalues batched per chunk);
    guarded by SUBSET_BUDGET.
    """
    d = dictionary.cols
    if not 1 <= k <= min(d, dictionary.rows):
        raise KOutOfRangeError(
            f"ric_exact needs 1 <= k <= min(d, n) = {min(d, dictionary.rows)}, got {k}"
        )
    _check_budget(d, k)
    g = gram(dictionary)
    if k == 1:
        return float(np.max(np.abs(np.diag(g) - 1.0)))
    worst = 0.0
    for subsets in _subset_chunks(d, k):
        blocks = g[subsets[:, :, None], subsets[:, None, :]]
        eigs = np.linalg.eigvalsh(blocks)
        worst = max(
            worst,
            float(np.max(np.abs(eigs[:, 0] - 1.0))),
            float(np.max(np.abs(eigs[:, -1] - 1.0))),
        )
    return worst


def omega_k(dictionary: Dictionary, k: int) -> float:
    """omega_k = min over k-subsets S of 1 / ||(Phi_S^T Phi_S)^{-1}||_{inf,2}.

    The mixed norm of a k x k matrix over the unit inf-ball is attained at
    a sign vector, so each subset contributes
    ``max_{x in {-1,1}^k} ||(G_S)^{-1} x||_2``; sign vectors are enumerated
    once (2^(k-1), x and -x coincide) and applied to all blocks in a chunk.
    """
    d = dictionary.cols
    if not 1 <= k <= min(d, dictionary.rows):
        raise KOutOfRangeError(
            f"omega_k needs 1 <= k <= min(d, n) = {min(d, dictionary.rows)}, got {k}"
        )
    _check_budget(d, k)
    g = gram(dictionary)
    if k == 1:
        return 1.0  # every 1x1 restricted Gram is exactly [1]
    signs = np.empty((1 << (k - 1), k))
    idx = np.arange(1 << (k - 1), dtype=np.uint64)
    signs[:, 0] = 1.0
    signs[:, 1:] = 2.0 * ((idx[:, None] >> np.arange(k - 1, dtype=np.uint64)) & 1) - 1.0
    worst_norm = 0.0
    for subsets in _subset_chunks(d, k):
        blocks = g[subsets[:, :, None], subsets[:, None, :]]
        eigs = np.linalg.eigvalsh(blocks)
        small = eigs[:, 0] < _SINGULAR_EIG_TOL
        if np.any(small):
            raise SingularSubsetError(subsets[int(np.argmax(small))])
        inv = np.linalg.inv(blocks)
        # (N,k,k) @ (k,S) -> norms of inv @ x over all sign vectors x
        prod = np.einsum("nij,sj->nis", inv, signs)
        norms_sq = np.einsum("nis,nis->ns", prod, prod)
        worst_norm = max(worst_norm, float(np.max(norms_sq)))
    return float(1.0 / np.sqrt(worst_norm))


def coherence_report(
    dictionary: Dictionary,
    kmax: int,
    compute_ric: bool = False,
    compute_omega: bool = False,
) -> CoherenceReport:
    """All metrics for k = 1..kmax in one pass over the sorted Gram rows."""
    d = dictionary.cols
    if not 1 <= kmax <= d - 1:
        raise KOutOfRangeError(f"kmax must satisfy 1 <= kmax <= d-1 = {d - 1}")
    rows = _sorted_offdiag_rows(dictionary)
    sq = np.cumsum(rows**2, axis=1)
    ab = np.cumsum(rows, axis=1)
    global2 = tuple(float(np.sqrt(np.max(sq[:, k - 1]))) for k in range(1, kmax + 1))
    cumulative = tuple(float(np.max(ab[:, k - 1])) for k in range(1, kmax + 1))
    ric = None
    if compute_ric:
        ric = tuple(ric_exact(dictionary, k) for k in range(1, kmax + 1))
    omega = None
    if compute_omega:
        omega = tuple(omega_k(dictionary, k) for k in range(1, kmax + 1))
    return CoherenceReport(
        mutual=global2[0],
        global2=global2,
        cumulative=cumulative,
        ric=ric,
        omega=omega,
        kmax=kmax,
    )
