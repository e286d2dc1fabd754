import json
import math

import numpy as np
import pytest

from ompt import (
    Dictionary,
    OMPStrategy,
    OMPTStrategy,
    RankDeficientError,
    ScanOrder,
    SolverOptions,
    StopReason,
    build_identity_fourier_dictionary,
    coherence_report,
    exact_recovery,
    generate_sparse_signal,
    iteration_bound,
    make_measurement,
    noiseless_interval,
    normalize_columns,
    omp,
    ompt,
    recover_sparse,
    sparsest_solution,
    UniformSymmetric,
)
from ompt._rng import scan_permutation
from ompt.linalg import SparseSignal, SupportSet

from .conftest import perturbed_orthonormal, random_dictionary


def orthonormal(n):
    return normalize_columns(np.eye(n))


def plant(rng, dictionary, k, lo=0.9, hi=1.0):
    sig = generate_sparse_signal(dictionary.cols, k, UniformSymmetric(lo, hi), rng)
    return sig, dictionary.entries @ sig.to_dense()


class TestScanPermutation:
    def test_is_permutation_and_deterministic(self):
        for seed, it, d in [(0, 0, 1), (7, 3, 17), (2**63 + 5, 11, 301)]:
            p = scan_permutation(seed, it, d)
            assert sorted(p.tolist()) == list(range(d))
            assert np.array_equal(p, scan_permutation(seed, it, d))

    def test_varies_with_iteration_and_seed(self):
        base = scan_permutation(5, 0, 64)
        assert not np.array_equal(base, scan_permutation(5, 1, 64))
        assert not np.array_equal(base, scan_permutation(6, 0, 64))

    def test_backends_agree(self):
        try:
            from ompt import _core
        except ImportError:
            pytest.skip("compiled backend not built")
        for seed, it, d in [(0, 0, 7), (123, 5, 256), (2**64 - 1, 17, 31)]:
            assert np.array_equal(
                scan_permutation(seed, it, d), _core.scan_permutation(seed, it, d)
            )


class TestOmptBasics:
    def test_single_exact_atom(self, backend):
        d = orthonormal(6)
        result = ompt(d, d.atom(3), 0.5, SolverOptions(rng_seed=1))
        assert result.support.indices == (3,)
        assert result.coefficients == pytest.approx([1.0], abs=1e-14)
        assert result.iterations == 1
        assert result.final_residual_norm <= 1e-14
        assert result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD

    def test_zero_signal(self, backend):
        d = orthonormal(4)
        result = ompt(d, np.zeros(4), 0.3)
        assert result.iterations == 0
        assert result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD
        assert result.inner_product_count == 0
        assert len(result.residual_norms) == 1

    def test_estimate_zero_off_support(self, backend):
        rng = np.random.default_rng(2)
        d = perturbed_orthonormal(rng, 10, 10)
        sig, f = plant(rng, d, 3)
        result = ompt(d, f, 0.4, SolverOptions(rng_seed=3))
        off = np.ones(10, dtype=bool)
        off[list(result.support.indices)] = False
        assert np.all(result.estimate[off] == 0.0)
        assert result.estimate[list(result.support.indices)] == pytest.approx(
            result.coefficients.tolist()
        )

    def test_t_validation(self):
        d = orthonormal(4)
        for t in (0.0, 1.0, -0.1, 2.0):
            with pytest.raises(ValueError):
                ompt(d, np.ones(4), t)

    def test_no_index_exit(self, backend):
        # two orthogonal clusters: residual along an unrepresented direction
        entries = np.eye(4)[:, :2]
        d = Dictionary(entries)
        f = np.array([0.1, 0.1, 1.0, 0.0])
        result = ompt(d, f, 0.9, SolverOptions(rng_seed=4))
        assert result.stop_reason is StopReason.NO_INDEX_MEETS_THRESHOLD

    def test_max_iterations_exit(self, backend):
        rng = np.random.default_rng(5)
        d = build_identity_fourier_dictionary(16)
        sig, f = plant(rng, d, 6, 0.2, 1.0)
        result = ompt(
            d, f, 0.2, SolverOptions(max_iterations=2, rng_seed=6, residual_stop_ratio=1e-12)
        )
        assert result.stop_reason is StopReason.MAX_ITERATIONS
        assert result.iterations == 2

    def test_fixed_scan_order(self, backend):
        # with a fixed ascending scan the first qualifying atom has the
        # lowest index among qualifiers
        d = orthonormal(5)
        f = 0.8 * d.atom(1) + 0.79 * d.atom(2)
        result = ompt(
            d, f, 0.5, SolverOptions(scan_order=ScanOrder.FIXED_ASCENDING)
        )
        assert result.support.indices[0] == 1


class TestOmptInvariants:
    @staticmethod
    def _instances(seed, count):
        rng = np.random.default_rng(seed)
        for _ in range(count):
            n = int(rng.integers(8, 20))
            d = perturbed_orthonormal(rng, n, n, sigma=float(rng.uniform(0.05, 0.3)))
            k = int(rng.integers(1, 5))
            sig, f = plant(rng, d, k, 0.3, 1.0)
            t = float(rng.uniform(0.1, 0.6))
            yield d, f, t, int(rng.integers(0, 2**62))

    def test_no_atom_selected_twice(self, backend):
        for d, f, t, seed in self._instances(11, 25):
            result = ompt(d, f, t, SolverOptions(rng_seed=seed))
            assert len(set(result.support.indices)) == result.iterations

    def test_accepted_step_decay(self, backend):
        for d, f, t, seed in self._instances(12, 25):
            result = ompt(d, f, t, SolverOptions(rng_seed=seed))
            norms = result.residual_norms
            for s in range(result.iterations):
                assert norms[s + 1] <= math.sqrt(1 - t * t) * norms[s] + 1e-10

    def test_geometric_envelope(self, backend):
        for d, f, t, seed in self._instances(13, 25):
            result = ompt(d, f, t, SolverOptions(rng_seed=seed))
            fnorm = result.residual_norms[0]
            for s, r in enumerate(result.residual_norms):
                assert r <= (1 - t * t) ** (s / 2.0) * fnorm + 1e-8

    def test_iteration_count_bounded(self, backend):
        for d, f, t, seed in self._instances(14, 25):
            result = ompt(d, f, t, SolverOptions(rng_seed=seed))
            if result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD:
                assert result.iterations <= iteration_bound(t)

    def test_residual_strictly_decreasing(self, backend):
        for d, f, t, seed in self._instances(15, 25):
            result = ompt(d, f, t, SolverOptions(rng_seed=seed))
            norms = result.residual_norms
            assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_determinism_byte_identical(self, backend):
        for d, f, t, seed in self._instances(16, 10):
            r1 = ompt(d, f, t, SolverOptions(rng_seed=seed))
            r2 = ompt(d, f, t, SolverOptions(rng_seed=seed))
            assert r1.support.indices == r2.support.indices
            assert np.array_equal(r1.coefficients, r2.coefficients)
            assert np.array_equal(r1.residual_norms, r2.residual_norms)
            assert r1.inner_product_count == r2.inner_product_count
            assert r1.stop_reason == r2.stop_reason


class TestTheorem1Recovery:
    """Feasible instances recover exactly for every admissible threshold."""

    @staticmethod
    def feasible_instances(count=8, seed=1234):
        rng = np.random.default_rng(seed)
        found = []
        while len(found) < count:
            n = int(rng.integers(8, 13))
            d = perturbed_orthonormal(rng, n, n, sigma=float(rng.uniform(0.05, 0.15)))
            k = int(rng.integers(1, 4))
            report = coherence_report(d, max(k, 1), compute_ric=True)
            nu, delta = report.nu(k), report.delta(k)
            if delta + math.sqrt(k) * nu < 1.0 and delta < 0.35:
                found.append((d, k, nu, delta))
        return found

    def test_exact_recovery_inside_interval(self, backend):
        rng = np.random.default_rng(77)
        for d, k, nu, delta in self.feasible_instances():
            interval = noiseless_interval(nu, delta, k)
            assert interval.feasible
            for frac in (0.1, 0.35, 0.6, 0.75):
                t = interval.sample(frac)
                for _ in range(3):
                    sig, f = plant(rng, d, k)  # near-equal magnitudes
                    result = ompt(d, f, t, SolverOptions(rng_seed=int(rng.integers(2**60))))
                    assert result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD
                    assert result.iterations == k
                    assert set(result.support.indices) == sig.support.as_set()
                    assert exact_recovery(result, sig, rel_tol=1e-8)


class TestOmp:
    def test_inner_product_count_identity(self, backend):
        # k(2d - k + 1)/2 inner products after k full iterations
        rng = np.random.default_rng(21)
        d = build_identity_fourier_dictionary(128)
        sig, f = plant(rng, d, 10, 0.2, 1.0)
        result = omp(d, f, k_stop=10)
        assert result.iterations == 10
        assert result.inner_product_count == 2515  # 10 * (512 - 10 + 1) / 2
        assert result.inner_product_count == 10 * (2 * 256 - 10 + 1) // 2

    def test_greedy_order_forced(self, backend):
        d = orthonormal(5)
        f = 2.0 * d.atom(1) + 1.0 * d.atom(2)
        result = omp(d, f, k_stop=2)
        assert result.support.indices == (1, 2)
        assert result.final_residual_norm <= 1e-12
        assert sorted(result.coefficients.tolist()) == pytest.approx([1.0, 2.0])

    def test_early_stop_on_residual(self, backend):
        d = orthonormal(6)
        f = d.atom(0)
        result = omp(d, f, k_stop=3, residual_tol=1e-10)
        assert result.iterations == 1
        assert result.stop_reason is StopReason.RESIDUAL_BELOW_THRESHOLD

    def test_matches_l0_oracle_under_coherence_guarantee(self, backend):
        # k < (1 + 1/M)/2 certifies greedy recovery; check against the oracle
        rng = np.random.default_rng(22)
        checked = 0
        while checked < 10:
            d = perturbed_orthonormal(rng, 10, 10, sigma=0.1)
            from ompt import mutual_coherence

            m = mutual_coherence(d)
            k = 2
            if k >= (1 + 1 / m) / 2:
                continue
            sig, f = plant(rng, d, k, 0.5, 1.0)
            result = omp(d, f, k_stop=k)
            oracle = sparsest_solution(d, f, k_max=k)
            assert oracle.signal is not None
            assert set(result.support.indices) == oracle.signal.support.as_set()
            assert exact_recovery(result, sig, rel_tol=1e-8)
            checked += 1

    def test_rank_deficient_propagates(self, backend):
        # third pick is forced onto an atom inside the selected span
        e = np.eye(3)
        third = (e[:, 0] + e[:, 1]) / np.linalg.norm(e[:, 0] + e[:, 1])
        d = Dictionary(np.column_stack([e[:, 0], e[:, 1], third]))
        f = third + 1e-3 * e[:, 0]
        with pytest.raises(RankDeficientError):
            omp(d, f, k_stop=3)

    def test_k_stop_validation(self):
        d = orthonormal(4)
        with pytest.raises(ValueError):
            omp(d, np.ones(4), k_stop=0)
        with pytest.raises(ValueError):
            omp(d, np.ones(4), k_stop=5)


class TestRecoverSparse:
    def test_ompt_passthrough(self, backend):
        rng = np.random.default_rng(31)
        d = perturbed_orthonormal(rng, 8, 8)
        sig, f = plant(rng, d, 2)
        meas = make_measurement(d, sig, 0.0)
        direct = ompt(d, f, 0.4, SolverOptions(rng_seed=9))
        via = recover_sparse(d, meas, OMPTStrategy(t=0.4), SolverOptions(rng_seed=9))
        assert via.strategy == "ompt"
        assert via.support.indices == direct.support.indices
        assert np.array_equal(via.coefficients, direct.coefficients)

    def test_omp_passthrough(self, backend):
        rng = np.random.default_rng(32)
        d = perturbed_orthonormal(rng, 8, 8)
        sig, f = plant(rng, d, 2)
        meas = make_measurement(d, sig, 0.0)
        direct = omp(d, f, k_stop=2)
        via = recover_sparse(d, meas, OMPStrategy(k_stop=2))
        assert via.strategy == "omp"
        assert via.support.indices == direct.support.indices

    def test_strategies_agree_on_feasible_instance(self, backend):
        rng = np.random.default_rng(33)
        for d, k, nu, delta in TestTheorem1Recovery.feasible_instances(3, seed=999):
            interval = noiseless_interval(nu, delta, k)
            t = interval.sample(0.4)
            sig, f = plant(rng, d, k)
            meas = make_measurement(d, sig, 0.0)
            a = recover_sparse(d, meas, OMPTStrategy(t=t), SolverOptions(rng_seed=1))
            b = recover_sparse(d, meas, OMPStrategy(k_stop=k))
            assert set(a.support.indices) == set(b.support.indices)

    def test_unknown_strategy(self):
        d = orthonormal(3)
        with pytest.raises(TypeError):
            recover_sparse(d, np.ones(3), "greedy")


class TestResultContract:
    def test_json_schema(self, backend):
        rng = np.random.default_rng(41)
        d = perturbed_orthonormal(rng, 8, 8)
        sig, f = plant(rng, d, 2)
        result = ompt(d, f, 0.4, SolverOptions(rng_seed=5))
        obj = json.loads(result.to_json())
        assert set(obj) == {
            "support",
            "coefficients",
            "residual_norms",
            "inner_products",
            "iterations",
            "stop_reason",
        }
        assert obj["support"] == list(result.support.indices)
        assert obj["iterations"] == result.iterations
        assert obj["stop_reason"] == "ResidualBelowThreshold"
        assert len(obj["residual_norms"]) == obj["iterations"] + 1

    def test_residual_norm_trace_shape(self, backend):
        rng = np.random.default_rng(42)
        d = perturbed_orthonormal(rng, 9, 9)
        sig, f = plant(rng, d, 3)
        result = ompt(d, f, 0.3, SolverOptions(rng_seed=7))
        assert len(result.residual_norms) == result.iterations + 1
        assert result.residual_norms[0] == pytest.approx(np.linalg.norm(f), rel=1e-14)


class TestBackendParity:
    def test_identical_outputs(self):
        from ompt import available_backends, use_backend

        if len(available_backends()) < 2:
            pytest.skip("compiled backend not built")
        rng = np.random.default_rng(51)
        for trial in range(20):
            n = int(rng.integers(8, 33))
            d_atoms = int(rng.integers(n, 2 * n + 1))
            d = random_dictionary(rng, n, d_atoms)
            k = int(rng.integers(1, 5))
            sig, f = plant(rng, d, k, 0.1, 1.0)
            t = float(rng.uniform(0.1, 0.5))
            seed = int(rng.integers(2**62))
            outs = {}
            for name in available_backends():
                with use_backend(name):
                    r1 = ompt(d, f, t, SolverOptions(rng_seed=seed))
                    r2 = omp(d, f, k_stop=k)
                    outs[name] = (r1, r2)
            a1, a2 = outs["cython"]
            b1, b2 = outs["python"]
            assert a1.support.indices == b1.support.indices
            assert a1.inner_product_count == b1.inner_product_count
            assert a1.stop_reason == b1.stop_reason
            assert np.allclose(a1.coefficients, b1.coefficients, atol=1e-10)
            assert a2.support.indices == b2.support.indices
            assert a2.inner_product_count == b2.inner_product_count
