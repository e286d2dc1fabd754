"""Monte-Carlo benchmark harness and convergence checks.

Reproduces the phase-transition study: an identity-plus-Fourier
dictionary, randomly planted sparse signals, seeded trials comparing OMPT
against OMP on success rate and inner-product cost, and residual-decay
checks against the convergence bound ||r_m|| <= eps + t * ||c||_1.

Determinism contract: every trial derives its own RNG stream from
(rng_seed, k, trial_index), aggregation is integer-exact, and reports are
byte-identical across runs and worker counts.
"""

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import IoError, OmptError
from .linalg import Dictionary, SparseSignal, SupportSet
from .solvers import SolverOptions, StopReason, omp, ompt
from .thresholds import iteration_bound

#: Default scan threshold for the identity+Fourier benchmark, calibrated so
#: the success plateau and cost profile match the published study (see
#: README); admissible for k <= 3 under the M < 1/(2k-1) bound at this
#: dictionary's coherence M = sqrt(2/n).
DEFAULT_BENCHMARK_T = 0.26
#: While-loop ratio used by benchmark trials: the residual exit fires only
#: at (numerically) exact representation; termination otherwise comes from
#: the thresholding scan itself.
BENCHMARK_STOP_RATIO = 1e-12
#: Relative floor of the numerical support test.
SUPPORT_FLOOR = 1e-9

_CSV_HEADER = "k,success_ompt,success_omp,ip_ompt,ip_omp,iters_mean"


@dataclass(frozen=True)
class UniformSymmetric:
    """Values with magnitudes uniform on [lo, hi] and equiprobable signs."""

    lo: float = 1e-6
    hi: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi:
            raise ValueError("need 0 <= lo < hi")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        mags = rng.uniform(self.lo, self.hi, size=size)
        signs = rng.choice((-1.0, 1.0), size=size)
        return mags * signs


@dataclass(frozen=True, eq=False)
class Measurement:
    """Observed vector f = Phi a + w with noise budget ||w|| <= noise_level."""

    observed: np.ndarray
    noise_level: float = 0.0
    truth: SparseSignal | None = None


@dataclass(frozen=True)
class TrialConfig:
    n: int
    d: int
    sparsity_range: tuple[int, ...]
    trials_per_k: int = 1000
    threshold_t: float = DEFAULT_BENCHMARK_T
    noise_level: float = 0.0
    rng_seed: int = 0
    value_distribution: UniformSymmetric = field(default_factory=UniformSymmetric)
    success_tol: float = 1e-6

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("dimensions must be positive")
        if self.trials_per_k < 1:
            raise ValueError("trials_per_k must be >= 1")
        if not 0.0 < self.threshold_t < 1.0:
            raise ValueError("threshold_t must lie in (0, 1)")
        if self.noise_level < 0.0:
            raise ValueError("noise_level must be nonnegative")
        if any(not 1 <= k <= self.d for k in self.sparsity_range):
            raise ValueError("sparsity levels must lie in 1..d")
        object.__setattr__(self, "sparsity_range", tuple(int(k) for k in self.sparsity_range))


@dataclass(frozen=True)
class TrialRow:
    k: int
    success_rate_ompt: float
    success_rate_omp: float
    mean_inner_products_ompt: float
    mean_inner_products_omp: float
    mean_iterations: float  # OMPT iterations; OMP's equal k by construction


@dataclass(frozen=True, eq=False)
class TrialReport:
    rows: tuple[TrialRow, ...]
    config: TrialConfig
    timestamp: str


@dataclass(frozen=True, eq=False)
class ConvergenceInstance:
    """Signal f = Phi c + w with l1 budget C = ||c||_1 and ||w||_2 = eps.

    f_clean / C lies in the unit l1-hull of the atoms by construction.
    """

    coefficients: np.ndarray
    perturbation: np.ndarray
    f: np.ndarray
    l1_budget: float
    perturbation_norm: float


@dataclass(frozen=True)
class ConvergenceReport:
    final_residual: float
    residual_bound: float
    residual_margin: float
    envelope_margin: float
    iterations: int
    iteration_cap: int
    cap_applicable: bool
    cap_ok: bool
    stop_reason: str

    @property
    def passed(self) -> bool:
        ok = self.residual_margin >= 0.0 and self.envelope_margin >= 0.0
        return ok and (self.cap_ok or not self.cap_applicable)

    def to_json(self) -> str:
        data = asdict(self)
        data["passed"] = self.passed
        return json.dumps(data)


def build_identity_fourier_dictionary(n: int) -> Dictionary:
    """[I | F]: the standard basis next to the real trigonometric basis.

    F's columns are the constant, the paired cosines/sines at frequencies
    1..n/2-1, and the alternating column; all orthonormal, with every
    cross inner product against the identity block bounded by sqrt(2/n).
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be an even integer >= 2")
    x = np.arange(n)
    cols = [np.full(n, 1.0 / math.sqrt(n))]
    for j in range(1, n // 2):
        angle = 2.0 * np.pi * j * x / n
        cols.append(np.sqrt(2.0 / n) * np.cos(angle))
        cols.append(np.sqrt(2.0 / n) * np.sin(angle))
    cols.append(np.cos(np.pi * x) / math.sqrt(n))
    fourier = np.column_stack(cols)
    return Dictionary(np.hstack([np.eye(n), fourier]))


def generate_sparse_signal(
    d: int, k: int, dist: UniformSymmetric, rng: np.random.Generator
) -> SparseSignal:
    """Support uniform without replacement, values i.i.d. from ``dist``."""
    if not 1 <= k <= d:
        raise ValueError(f"k must satisfy 1 <= k <= d, got {k}")
    support = np.sort(rng.choice(d, size=k, replace=False))
    values = dist.draw(rng, k)
    return SparseSignal(d, SupportSet(support.tolist()), values)


def make_measurement(
    dictionary: Dictionary,
    signal: SparseSignal,
    noise_level: float,
    rng: np.random.Generator | None = None,
) -> Measurement:
    """f = Phi a, plus (when requested) noise of exactly ``noise_level`` norm
    in a uniformly random direction."""
    f = dictionary.entries @ signal.to_dense()
    if noise_level > 0.0:
        if rng is None:
            raise ValueError("noise_level > 0 requires an rng")
        w = rng.standard_normal(dictionary.rows)
        f = f + (noise_level / np.linalg.norm(w)) * w
    return Measurement(observed=f, noise_level=noise_level, truth=signal)


def numerical_support(vector: np.ndarray, floor: float = SUPPORT_FLOOR) -> frozenset:
    """Indices of entries distinguishable from zero at working precision.

    Atoms selected beyond the true support carry coefficients that are
    exactly zero in exact arithmetic; in floats they surface as O(1e-16)
    noise, far below any admissible signal value, so the support of an
    estimate is read with a relative floor rather than an exact-zero test.
    """
    v = np.asarray(vector)
    scale = max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
    return frozenset(int(i) for i in np.nonzero(np.abs(v) > floor * scale)[0])


def _trial_rng(seed: int, k: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**63 - 1), k, trial]))


def _run_single_trial(config: TrialConfig, dictionary: Dictionary, k: int, trial: int):
    """One seeded trial; returns integer-valued per-trial statistics."""
    rng = _trial_rng(config.rng_seed, k, trial)
    signal = generate_sparse_signal(config.d, k, config.value_distribution, rng)
    measurement = make_measurement(dictionary, signal, config.noise_level, rng)
    solver_seed = int.from_bytes(rng.bytes(8), "little")
    truth = signal.support.as_set()
    dense = signal.to_dense()
    scale = float(np.linalg.norm(dense))

    def score(result) -> bool:
        if numerical_support(result.estimate) != truth:
            return False
        return float(np.linalg.norm(result.estimate - dense)) <= config.success_tol * scale

    # the residual cannot drop below the noise floor, so the stop level
    # tracks it; noiseless runs stop only at (numerically) exact recovery
    stop_ratio = BENCHMARK_STOP_RATIO
    fnorm = float(np.linalg.norm(measurement.observed))
    if config.noise_level > 0.0 and fnorm > 0.0:
        stop_ratio = max(stop_ratio, config.noise_level / fnorm)
    options = SolverOptions(
        max_iterations=config.n,
        rng_seed=solver_seed,
        residual_stop_ratio=stop_ratio,
    )
    try:
        res_t = ompt(dictionary, measurement.observed, config.threshold_t, options)
        ok_t, ip_t, iters_t = score(res_t), res_t.inner_product_count, res_t.iterations
    except OmptError:
        ok_t, ip_t, iters_t = False, 0, 0
    try:
        res_o = omp(dictionary, measurement.observed, k_stop=k, residual_tol=0.0)
        ok_o, ip_o = score(res_o), res_o.inner_product_count
    except OmptError:
        ok_o, ip_o = False, 0
    return ok_t, ok_o, ip_t, ip_o, iters_t


def _run_block(config: TrialConfig, dictionary: Dictionary, k: int, lo: int, hi: int):
    """Integer aggregates over trials [lo, hi) at sparsity k."""
    succ_t = succ_o = ip_t = ip_o = iters = 0
    for trial in range(lo, hi):
        ok_t, ok_o, a, b, c = _run_single_trial(config, dictionary, k, trial)
        succ_t += ok_t
        succ_o += ok_o
        ip_t += a
        ip_o += b
        iters += c
    return k, succ_t, succ_o, ip_t, ip_o, iters


def run_trials(
    config: TrialConfig, dictionary: Dictionary, workers: int = 1
) -> TrialReport:
    """Run the full sweep; trial streams make the result schedule-independent."""
    if (config.n, config.d) != dictionary.shape:
        raise ValueError(
            f"config dims {(config.n, config.d)} do not match dictionary {dictionary.shape}"
        )
    totals = {
        k: [0, 0, 0, 0, 0] for k in config.sparsity_range
    }  # succ_t, succ_o, ip_t, ip_o, iters

    def merge(result):
        k, *stats = result
        for i, v in enumerate(stats):
            totals[k][i] += v

    if workers <= 1:
        for k in config.sparsity_range:
            merge(_run_block(config, dictionary, k, 0, config.trials_per_k))
    else:
        block = max(1, -(-config.trials_per_k // workers))
        jobs = [
            (k, lo, min(lo + block, config.trials_per_k))
            for k in config.sparsity_range
            for lo in range(0, config.trials_per_k, block)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(
                _run_block,
                *zip(*((config, dictionary, k, lo, hi) for k, lo, hi in jobs)),
            ):
                merge(result)

    nt = config.trials_per_k
    rows = tuple(
        TrialRow(
            k=k,
            success_rate_ompt=totals[k][0] / nt,
            success_rate_omp=totals[k][1] / nt,
            mean_inner_products_ompt=totals[k][2] / nt,
            mean_inner_products_omp=totals[k][3] / nt,
            mean_iterations=totals[k][4] / nt,
        )
        for k in config.sparsity_range
    )
    stamp = datetime.now(timezone.utc).isoformat()
    return TrialReport(rows=rows, config=config, timestamp=stamp)


def random_convergence_instance(
    dictionary: Dictionary,
    rng: np.random.Generator,
    n_terms: int,
    epsilon: float,
    l1_budget: float = 1.0,
) -> ConvergenceInstance:
    """Random coefficients scaled to the requested l1 norm, plus a
    perturbation of exactly ``epsilon`` norm."""
    if not 1 <= n_terms <= dictionary.cols:
        raise ValueError("n_terms must lie in 1..d")
    idx = rng.choice(dictionary.cols, size=n_terms, replace=False)
    raw = rng.uniform(0.25, 1.0, size=n_terms) * rng.choice((-1.0, 1.0), size=n_terms)
    coeffs = np.zeros(dictionary.cols)
    coeffs[idx] = raw * (l1_budget / np.sum(np.abs(raw)))
    clean = dictionary.entries @ coeffs
    if epsilon > 0.0:
        w = rng.standard_normal(dictionary.rows)
        w *= epsilon / np.linalg.norm(w)
    else:
        w = np.zeros(dictionary.rows)
    return ConvergenceInstance(
        coefficients=coeffs,
        perturbation=w,
        f=clean + w,
        l1_budget=float(np.sum(np.abs(coeffs))),
        perturbation_norm=epsilon,
    )


def convergence_check(
    dictionary: Dictionary,
    instance: ConvergenceInstance,
    t: float,
    options: SolverOptions | None = None,
) -> ConvergenceReport:
    """Run OMPT and compare against the decay guarantees.

    Checks the terminal bound ||r_m|| <= eps + t * C, the per-iteration
    geometric envelope ||r_s|| <= (1 - t^2)^(s/2) ||f||, and -- when the
    run terminated via the residual criterion -- the iteration cap
    ceil(ln t^2 / ln(1 - t^2)).  Violations are reported, not raised.
    """
    result = ompt(dictionary, instance.f, t, options)
    bound = instance.perturbation_norm + t * instance.l1_budget
    fnorm = float(np.linalg.norm(instance.f))
    envelope = (1.0 - t * t) ** (np.arange(result.iterations + 1) / 2.0) * fnorm
    envelope_margin = float(np.min(envelope - result.residual_norms))
    cap = iteration_bound(t)
    cap_applicable = result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD
    return ConvergenceReport(
        final_residual=result.final_residual_norm,
        residual_bound=bound,
        residual_margin=bound - result.final_residual_norm,
        envelope_margin=envelope_margin,
        iterations=result.iterations,
        iteration_cap=cap,
        cap_applicable=cap_applicable,
        cap_ok=result.iterations <= cap,
        stop_reason=result.stop_reason.value,
    )


def _float_repr(x: float) -> str:
    return repr(float(x))


def report_to_csv(report: TrialReport) -> str:
    """CSV with exactly the columns k,success_ompt,success_omp,ip_ompt,ip_omp,iters_mean."""
    lines = [_CSV_HEADER]
    for row in report.rows:
        lines.append(
            ",".join(
                [
                    str(row.k),
                    _float_repr(row.success_rate_ompt),
                    _float_repr(row.success_rate_omp),
                    _float_repr(row.mean_inner_products_ompt),
                    _float_repr(row.mean_inner_products_omp),
                    _float_repr(row.mean_iterations),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: TrialReport) -> str:
    config = asdict(report.config)
    config["value_distribution"] = {
        "lo": report.config.value_distribution.lo,
        "hi": report.config.value_distribution.hi,
    }
    return json.dumps(
        {
            "config": config,
            "timestamp": report.timestamp,
            "rows": [asdict(row) for row in report.rows],
        }
    )


def export_report(report: TrialReport, path, fmt: str = "csv") -> None:
    """Persist a report; CSV round-trips all floats exactly (repr)."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    text = report_to_csv(report) if fmt == "csv" else report_to_json(report)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(path, exc) from exc


def load_report_rows_csv(path) -> list[TrialRow]:
    """Read back a CSV report written by :func:`export_report`."""
    try:
        text = open(path, "r", encoding="ascii").read()
    except OSError as exc:
        raise IoError(path, exc) from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _CSV_HEADER:
        raise IoError(path, "missing or malformed CSV header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise IoError(path, f"expected 6 columns, got {len(parts)}")
        rows.append(
            TrialRow(
                k=int(parts[0]),
                success_rate_ompt=float(parts[1]),
                success_rate_omp=float(parts[2]),
                mean_inner_products_ompt=float(parts[3]),
                mean_inner_products_omp=float(parts[4]),
                mean_iterations=float(parts[5]),
            )
        )
    return rows


def config_to_text(config: TrialConfig) -> str:
    """Flat key=value rendering of a TrialConfig."""
    dist = config.value_distribution
    items = [
        ("n", config.n),
        ("d", config.d),
        ("sparsity_range", ",".join(str(k) for k in config.sparsity_range)),
        ("trials_per_k", config.trials_per_k),
        ("threshold_t", _float_repr(config.threshold_t)),
        ("noise_level", _float_repr(config.noise_level)),
        ("rng_seed", config.rng_seed),
        ("value_distribution", f"UniformSymmetric({_float_repr(dist.lo)},{_float_repr(dist.hi)})"),
        ("success_tol", _float_repr(config.success_tol)),
    ]
    return "".join(f"{key}={value}\n" for key, value in items)


def config_from_text(text: str) -> TrialConfig:
    """Parse the flat key=value form produced by :func:`config_to_text`."""
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    dist = UniformSymmetric()
    if "value_distribution" in fields:
        spec = fields["value_distribution"]
        if not (spec.startswith("UniformSymmetric(") and spec.endswith(")")):
            raise ValueError(f"unknown value distribution {spec!r}")
        lo, hi = spec[len("UniformSymmetric(") : -1].split(",")
        dist = UniformSymmetric(float(lo), float(hi))
    sparsity = tuple(
        int(tok) for tok in fields.get("sparsity_range", "").split(",") if tok
    )
    return TrialConfig(
        n=int(fields["n"]),
        d=int(fields["d"]),
        sparsity_range=sparsity,
        trials_per_k=int(fields.get("trials_per_k", 1000)),
        threshold_t=float(fields.get("threshold_t", DEFAULT_BENCHMARK_T)),
        noise_level=float(fields.get("noise_level", 0.0)),
        rng_seed=int(fields.get("rng_seed", 0)),
        value_distribution=dist,
        success_tol=float(fields.get("success_tol", 1e-6)),
    )
