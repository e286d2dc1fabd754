"""Admissibility calculus for the threshold t, noise level, and iteration count.

Every guarantee has the same shape: a feasibility condition on the metrics
and an admissible half-open interval (lower, upper] for t.  The noiseless
interval is

    nu_k / sqrt(1 - delta_k)  <  t  <=  sqrt(1 - delta_k) / sqrt(k)

feasible exactly when delta_k + sqrt(k) nu_k < 1; the four corollary
variants substitute metric bounds for (nu_k, delta_k), and the noisy
variant perturbs both endpoints by the noise budget.
"""

import json
import math
from dataclasses import dataclass

from .errors import (
    DeltaOutOfRangeError,
    KOutOfRangeError,
    MissingMetricError,
    TOutOfRangeError,
)
from .metrics import CoherenceReport


@dataclass(frozen=True)
class ThresholdInterval:
    """Admissible (lower, upper] range for the threshold t.

    ``feasible`` mirrors the generating condition, which coincides with
    ``lower < upper`` in exact arithmetic.  Degenerate regimes (e.g. a
    nonpositive noisy lower-bound denominator) are reported as infeasible
    with both endpoints zero.
    """

    lower: float
    upper: float
    feasible: bool
    source: str = ""

    def contains(self, t: float) -> bool:
        return self.feasible and self.lower < t <= self.upper

    def sample(self, fraction: float) -> float:
        """Point at the given interior fraction of (lower, upper)."""
        if not self.feasible:
            raise ValueError("cannot sample an infeasible interval")
        if not 0.0 < fraction < 1.0:
            raise ValueError("fraction must lie strictly in (0, 1)")
        return self.lower + fraction * (self.upper - self.lower)

    def to_json(self) -> str:
        return json.dumps(
            {
                "lower": self.lower,
                "upper": self.upper,
                "feasible": self.feasible,
                "source": self.source,
            }
        )


@dataclass(frozen=True)
class NoisyRecoveryBudget:
    """Noise admissibility summary at a queried noise level epsilon."""

    epsilon_max: float
    interval: ThresholdInterval
    a_min: float
    error_bound: float


def _validate_nu_delta(nu_k: float, delta_k: float) -> None:
    if not 0.0 <= delta_k < 1.0:
        raise DeltaOutOfRangeError(f"delta must satisfy 0 <= delta < 1, got {delta_k}")
    if nu_k < 0.0:
        raise ValueError(f"nu must be nonnegative, got {nu_k}")


def _interval(nu_eff: float, delta_eff: float, k: int, source: str) -> ThresholdInterval:
    """Generic (lower, upper] with substituted effective metrics.

    delta_eff >= 1 cannot occur under a true feasibility condition; it is
    mapped to an infeasible zero interval rather than an error because it
    is a legitimate "guarantee unavailable" regime for corollary bounds.
    """
    if delta_eff >= 1.0:
        return ThresholdInterval(0.0, 0.0, False, source)
    root = math.sqrt(1.0 - delta_eff)
    lower = nu_eff / root
    upper = root / math.sqrt(k)
    feasible = delta_eff + math.sqrt(k) * nu_eff < 1.0
    return ThresholdInterval(lower, upper, feasible, source)


def noiseless_interval(nu_k: float, delta_k: float, k: int) -> ThresholdInterval:
    """Exact-recovery threshold range from (nu_k, delta_k)."""
    if k < 1:
        raise KOutOfRangeError(f"k must be >= 1, got {k}")
    _validate_nu_delta(nu_k, delta_k)
    return _interval(nu_k, delta_k, k, "theorem1")


def corollary_intervals(report: CoherenceReport, k: int) -> dict[str, ThresholdInterval]:
    """The four substituted threshold ranges, keyed cor_i..cor_iv.

    (i)   uses delta_k and delta_{k+1}        (needs exhaustive RIC)
    (ii)  uses nu_k and nu_{k-1}
    (iii) uses mu_{1,k-1} and mu_{1,k}
    (iv)  uses the mutual coherence M alone, feasible iff M < 1/(2k-1)

    Stated for k >= 2 only; k = 1 queries are rejected.
    """
    if k < 2:
        raise KOutOfRangeError("corollary intervals are stated for k >= 2")
    if report.ric is None:
        raise MissingMetricError("condition (i) needs RIC values in the report")
    if report.kmax < k + 1:
        raise MissingMetricError(
            f"condition (i) needs delta_{k + 1}; report covers kmax = {report.kmax}"
        )
    out = {}
    out["cor_i"] = _interval(report.delta(k + 1), report.delta(k), k, "cor_i")
    out["cor_ii"] = _interval(
        report.nu(k), math.sqrt(k - 1) * report.nu(k - 1), k, "cor_ii"
    )
    out["cor_iii"] = _interval(report.mu1(k), report.mu1(k - 1), k, "cor_iii")
    m = report.mutual
    out["cor_iv"] = _interval(math.sqrt(k) * m, (k - 1) * m, k, "cor_iv")
    return out


def noisy_interval(
    nu_k: float, delta_k: float, k: int, a_min: float, epsilon: float
) -> ThresholdInterval:
    """Threshold range guaranteeing support recovery at noise level epsilon.

        lower = (nu_k |a_min| + eps) / (sqrt(1-delta_k) |a_min| - eps)
        upper = ((1-delta_k) |a_min| - eps) / (sqrt(k(1-delta_k)) |a_min| + eps)

    Degenerate inputs (nonpositive lower denominator, delta >= 1) yield an
    infeasible interval rather than an error.
    """
    if k < 1:
        raise KOutOfRangeError(f"k must be >= 1, got {k}")
    if a_min <= 0.0:
        raise ValueError(f"a_min must be positive, got {a_min}")
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if nu_k < 0.0:
        raise ValueError(f"nu must be nonnegative, got {nu_k}")
    if delta_k < 0.0 or delta_k >= 1.0:
        return ThresholdInterval(0.0, 0.0, False, "noisy")
    den_lower = math.sqrt(1.0 - delta_k) * a_min - epsilon
    if den_lower <= 0.0:
        return ThresholdInterval(0.0, 0.0, False, "noisy")
    lower = (nu_k * a_min + epsilon) / den_lower
    upper = ((1.0 - delta_k) * a_min - epsilon) / (
        math.sqrt(k * (1.0 - delta_k)) * a_min + epsilon
    )
    return ThresholdInterval(lower, upper, lower < upper, "noisy")


def max_noise_level(nu_k: float, delta_k: float, k: int, a_min: float) -> float:
    """Largest noise norm under which some admissible threshold exists.

        sqrt(1-d) (1-d - sqrt(k) nu) / ((sqrt(k)+1) sqrt(1-d) + (1-d) + nu) * |a_min|

    Returns 0 when delta_k + sqrt(k) nu_k >= 1 (no guarantee regime).  The
    noisy interval closes exactly (lower = upper) at the returned value.
    """
    if k < 1:
        raise KOutOfRangeError(f"k must be >= 1, got {k}")
    if a_min <= 0.0:
        raise ValueError(f"a_min must be positive, got {a_min}")
    if nu_k < 0.0 or delta_k < 0.0:
        raise ValueError("metrics must be nonnegative")
    gap = 1.0 - delta_k - math.sqrt(k) * nu_k
    if gap <= 0.0 or delta_k >= 1.0:
        return 0.0
    root = math.sqrt(1.0 - delta_k)
    return root * gap * a_min / ((math.sqrt(k) + 1.0) * root + (1.0 - delta_k) + nu_k)


def noisy_recovery_budget(
    nu_k: float, delta_k: float, k: int, a_min: float, epsilon: float
) -> NoisyRecoveryBudget:
    """Bundle of the noise cap, the interval at epsilon, and the error bound."""
    return NoisyRecoveryBudget(
        epsilon_max=max_noise_level(nu_k, delta_k, k, a_min),
        interval=noisy_interval(nu_k, delta_k, k, a_min, epsilon),
        a_min=a_min,
        error_bound=error_bound(delta_k, epsilon),
    )


def iteration_bound(t: float) -> int:
    """Smallest integer m with (1 - t^2)^(m/2) <= t, i.e. ceil(ln t^2 / ln(1-t^2))."""
    if not 0.0 < t < 1.0:
        raise TOutOfRangeError(f"t must lie strictly in (0, 1), got {t}")
    x = math.log(t * t) / math.log1p(-t * t)
    # Relative backoff keeps exact fixed points (e.g. t = 1/sqrt(2) -> 1)
    # from rounding up through floating-point noise.
    return max(1, math.ceil(x - 1e-12 * max(1.0, abs(x))))


def error_bound(delta_k: float, epsilon: float) -> float:
    """Squared-error guarantee eps^2 / (1 - delta_k) after support recovery."""
    if not 0.0 <= delta_k < 1.0:
        raise DeltaOutOfRangeError(f"delta must satisfy 0 <= delta < 1, got {delta_k}")
    if epsilon < 0.0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    return epsilon * epsilon / (1.0 - delta_k)
