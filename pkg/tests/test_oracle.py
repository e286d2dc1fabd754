import itertools

import numpy as np
import pytest

from ompt import (
    Dictionary,
    EnumerationBudgetExceededError,
    KOutOfRangeError,
    SolverOptions,
    UniformSymmetric,
    coherence_report,
    generate_sparse_signal,
    noiseless_interval,
    normalize_columns,
    ompt,
    sparsest_solution,
    verify_spark_condition,
)

from .conftest import perturbed_orthonormal, random_dictionary


def orthonormal(n):
    return normalize_columns(np.eye(n))


class TestSparsestSolution:
    def test_single_atom(self):
        d = orthonormal(5)
        sol = sparsest_solution(d, d.atom(2), k_max=2)
        assert sol.sparsity == 1
        assert sol.unique
        assert sol.signal.support.indices == (2,)
        assert sol.signal.values == pytest.approx([1.0])
        assert sol.residual_norm <= 1e-12

    def test_zero_signal(self):
        d = orthonormal(4)
        sol = sparsest_solution(d, np.zeros(4), k_max=2)
        assert sol.sparsity == 0
        assert sol.unique
        assert sol.signal.k == 0

    def test_planted_two_sparse_unique(self):
        rng = np.random.default_rng(61)
        found = 0
        while found < 5:
            d = random_dictionary(rng, 6, 10)
            if not verify_spark_condition(d, 2):
                continue
            sig = generate_sparse_signal(10, 2, UniformSymmetric(0.5, 1.0), rng)
            f = d.entries @ sig.to_dense()
            sol = sparsest_solution(d, f, k_max=3)
            assert sol.sparsity == 2
            assert sol.unique
            assert sol.signal.support.as_set() == sig.support.as_set()
            dense = sol.signal.to_dense()
            assert np.allclose(dense, sig.to_dense(), atol=1e-9)
            found += 1

    def test_nonunique_detected(self):
        # duplicated atoms: several 2-supports represent f exactly
        e = np.eye(4)
        d = Dictionary(np.column_stack([e[:, 0], e[:, 1], e[:, 0], e[:, 1]]))
        f = e[:, 0] + e[:, 1]
        sol = sparsest_solution(d, f, k_max=2)
        assert sol.sparsity == 2
        assert not sol.unique

    def test_no_solution_within_budget(self):
        d = Dictionary(np.eye(4)[:, :2])
        f = np.array([0.0, 0.0, 1.0, 0.0])
        sol = sparsest_solution(d, f, k_max=2)
        assert sol.signal is None
        assert sol.sparsity == -1
        assert sol.residual_norm == pytest.approx(1.0)

    def test_enumeration_budget(self):
        rng = np.random.default_rng(62)
        d = random_dictionary(rng, 10, 300)
        with pytest.raises(EnumerationBudgetExceededError):
            sparsest_solution(d, rng.standard_normal(10), k_max=4)


class TestSparkCondition:
    def test_identity_true(self):
        assert verify_spark_condition(orthonormal(6), 2)

    def test_repeated_atom_false(self):
        e = np.eye(6)
        d = Dictionary(np.hstack([e, e[:, :1]]))
        assert not verify_spark_condition(d, 1)

    def test_matches_per_subset_svd(self):
        rng = np.random.default_rng(63)
        d = random_dictionary(rng, 8, 12)
        k = 2
        oracle = all(
            np.linalg.svd(d.entries[:, list(s)], compute_uv=False)[-1] > 1e-10
            for s in itertools.combinations(range(12), 2 * k)
        )
        assert verify_spark_condition(d, k) == oracle
        assert oracle  # Gaussian ensembles are full spark w.p. 1

    def test_k_out_of_range(self):
        with pytest.raises(KOutOfRangeError):
            verify_spark_condition(orthonormal(4), 3)


class TestOracleSolverAgreement:
    def test_unique_recovery_when_spark_holds(self):
        rng = np.random.default_rng(64)
        done = 0
        while done < 10:
            d = random_dictionary(rng, 8, 12)
            k = int(rng.integers(1, 3))
            if not verify_spark_condition(d, k):
                continue
            sig = generate_sparse_signal(12, k, UniformSymmetric(0.5, 1.0), rng)
            f = d.entries @ sig.to_dense()
            sol = sparsest_solution(d, f, k_max=k)
            assert sol.unique and sol.sparsity == k
            assert sol.signal.support.as_set() == sig.support.as_set()
            done += 1

    def test_ompt_coincides_under_theorem_hypotheses(self):
        rng = np.random.default_rng(65)
        done = 0
        while done < 8:
            n = int(rng.integers(8, 13))
            d = perturbed_orthonormal(rng, n, n, sigma=0.1)
            k = int(rng.integers(1, 4))
            report = coherence_report(d, k, compute_ric=True)
            nu, delta = report.nu(k), report.delta(k)
            if delta + np.sqrt(k) * nu >= 1.0 or delta > 0.3:
                continue
            interval = noiseless_interval(nu, delta, k)
            t = interval.sample(0.4)
            sig = generate_sparse_signal(n, k, UniformSymmetric(0.9, 1.0), rng)
            f = d.entries @ sig.to_dense()
            result = ompt(d, f, t, SolverOptions(rng_seed=int(rng.integers(2**60))))
            sol = sparsest_solution(d, f, k_max=k)
            assert sol.signal is not None
            assert set(result.support.indices) == sol.signal.support.as_set()
            est_oracle = sol.signal.to_dense()
            assert np.allclose(result.estimate, est_oracle, atol=1e-8)
            done += 1
