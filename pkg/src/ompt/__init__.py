"""Sparse-signal recovery with orthogonal matching pursuit with thresholding.

The library bundles the OMPT solver and its OMP baseline, the
sensing-matrix metrics (mutual/global-2/cumulative coherence, restricted
isometry constants, omega), the threshold/noise admissibility calculus
behind the recovery guarantees, a brute-force l0 oracle, and the seeded
Monte-Carlo benchmark harness.
"""

from ._backend import active_backend, available_backends, use_backend
from .errors import (
    BackendUnavailableError,
    DeltaOutOfRangeError,
    DimensionTooLargeError,
    EnumerationBudgetExceededError,
    IoError,
    KOutOfRangeError,
    MissingMetricError,
    NotSymmetricError,
    OmptError,
    RankDeficientError,
    SingularSubsetError,
    TOutOfRangeError,
    ZeroColumnError,
)
from .experiments import (
    ConvergenceInstance,
    ConvergenceReport,
    Measurement,
    TrialConfig,
    TrialReport,
    TrialRow,
    UniformSymmetric,
    build_identity_fourier_dictionary,
    convergence_check,
    export_report,
    generate_sparse_signal,
    make_measurement,
    numerical_support,
    random_convergence_instance,
    run_trials,
)
from .linalg import (
    Dictionary,
    SparseSignal,
    SupportSet,
    gram,
    load_matrix_text,
    min_singular_value,
    mixed_norm_inf_2,
    normalize_columns,
    restricted_least_squares,
    save_matrix_text,
    spectral_norm,
)
from .metrics import (
    CoherenceReport,
    coherence_report,
    cumulative_coherence,
    global_2_coherence,
    mutual_coherence,
    omega_k,
    ric_exact,
)
from .oracle import OracleSolution, sparsest_solution, verify_spark_condition
from .solvers import (
    OMPStrategy,
    OMPTStrategy,
    RecoveryResult,
    ScanOrder,
    SolverOptions,
    StopReason,
    exact_recovery,
    omp,
    ompt,
    recover_sparse,
)
from .thresholds import (
    NoisyRecoveryBudget,
    ThresholdInterval,
    corollary_intervals,
    error_bound,
    iteration_bound,
    max_noise_level,
    noiseless_interval,
    noisy_interval,
    noisy_recovery_budget,
)

__version__ = "1.0.0"
