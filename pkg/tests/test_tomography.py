import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from helpers import make_tsv
from modval.core import HilbertDims, StateVector, basis_state, random_state
from modval.errors import IllConditioned, IncompleteBasis
from modval.meters import QubitMeterState, evolve_qubit_meter, osaka_initial_state, osaka_meter
from modval.scenarios import hardy_projectors, hardy_tsv
from modval.tomography import (CountsRecord, MeasurementPlan, PMProbabilities, born_probabilities,
                               extract_modular, extract_modular_multi, linear_inversion, linear_inversion_exact,
                               partial_tomography_pm, pauli_bases, pm_basis, pm_weak_values, sample_counts)
from modval.twostate import modular_value

S = 1 / math.sqrt(2)
Z_ONLY = MeasurementPlan([np.eye(2)], 10, 0)


def plus():
    return StateVector(HilbertDims((2,)), [S, S])


class TestPlan:
    def test_pauli_labels(self):
        plan = MeasurementPlan.pauli(2, 10, 0)
        assert len(plan.bases) == 9 and plan.labels[0] == "ZZ" and plan.dim == 4

    def test_non_orthonormal(self):
        with pytest.raises(ValueError):
            MeasurementPlan([np.array([[1, 1], [0, 1]])], 10, 0)

    def test_shots_and_seed(self):
        with pytest.raises(ValueError):
            MeasurementPlan([np.eye(2)], 0, 0)
        with pytest.raises(ValueError):
            MeasurementPlan([np.eye(2)], 1, -1)
        with pytest.raises(ValueError):
            MeasurementPlan([np.eye(2)], 1, 2 ** 64)

    def test_pm_basis_order(self):
        (label, b), = pm_basis(2)
        # outcome order ++, +-, -+, --
        np.testing.assert_allclose(b[:, 1], np.kron([S, S], [S, -S]))
        assert label == "XX"

    def test_pauli_bases_orthonormal(self):
        for _, b in pauli_bases(2):
            np.testing.assert_allclose(b.conj().T @ b, np.eye(4), atol=1e-12)


class TestSampling:
    def test_basis_state_all_zero(self):
        counts = sample_counts(basis_state((2,), 0), MeasurementPlan([np.eye(2)], 1000, 5))
        np.testing.assert_array_equal(counts.counts, [[1000, 0]])

    def test_binomial_fraction(self):
        counts = sample_counts(plus(), MeasurementPlan([np.eye(2)], 10 ** 6, 12345))
        assert abs(counts.frequencies[0, 0] - 0.5) < 0.002

    def test_determinism(self):
        plan = MeasurementPlan.pauli(1, 5000, 77)
        a = sample_counts(plus(), plan)
        b = sample_counts(plus(), plan)
        assert a.to_csv() == b.to_csv()

    def test_seed_matters(self):
        a = sample_counts(plus(), MeasurementPlan.pauli(1, 5000, 1))
        b = sample_counts(plus(), MeasurementPlan.pauli(1, 5000, 2))
        assert not np.array_equal(a.counts, b.counts)

    def test_per_basis_streams_independent_of_plan_length(self):
        full_plan = MeasurementPlan.pauli(1, 1000, 9)
        head = MeasurementPlan(full_plan.bases[:1], 1000, 9, full_plan.labels[:1])
        np.testing.assert_array_equal(sample_counts(plus(), full_plan).counts[0],
                                      sample_counts(plus(), head).counts[0])

    def test_requires_normalized(self):
        with pytest.raises(ValueError):
            sample_counts(StateVector(HilbertDims((2,)), [1, 1]), Z_ONLY)

    def test_dimension_checked(self):
        with pytest.raises(ValueError):
            sample_counts(basis_state((2, 2), 0, 0), Z_ONLY)

    @settings(max_examples=30)
    @given(st.integers(min_value=0, max_value=2 ** 63), st.integers(min_value=1, max_value=500))
    def test_counts_sum(self, seed, shots):
        rng = np.random.default_rng(seed % 2 ** 32)
        counts = sample_counts(random_state(rng, 4), MeasurementPlan.pauli(2, shots, seed))
        assert np.all(counts.counts.sum(axis=1) == shots)


class TestCountsRecord:
    def test_csv_round_trip(self):
        plan = MeasurementPlan.pauli(2, 300, 4)
        counts = sample_counts(random_state(np.random.default_rng(1), 4), plan)
        text = counts.to_csv()
        assert text.splitlines()[0] == "basis_id,outcome_id,count"
        again = CountsRecord.from_csv(text, plan)
        np.testing.assert_array_equal(again.counts, counts.counts)

    def test_totals_enforced(self):
        with pytest.raises(ValueError):
            CountsRecord(Z_ONLY, [[3, 3]])
        with pytest.raises(ValueError):
            CountsRecord(Z_ONLY, [[11, -1]])


class TestLinearInversion:
    def test_exact_probabilities(self, rng):
        for n in (1, 2):
            s = random_state(rng, 2 ** n)
            bases = [b for _, b in pauli_bases(n)]
            est = linear_inversion_exact(bases, born_probabilities(s, bases))
            assert np.max(np.abs(est.rho - np.outer(s.amps, s.amps.conj()))) < 1e-10

    def test_shot_fidelity(self):
        s = random_state(np.random.default_rng(3), 2)
        est = linear_inversion(sample_counts(s, MeasurementPlan.pauli(1, 10 ** 5, 3)))
        assert np.vdot(s.amps, est.rho @ s.amps).real >= 0.999

    def test_maximally_mixed(self):
        plan = MeasurementPlan.pauli(1, 10 ** 5, 0)
        counts = CountsRecord(plan, [[50000, 50000]] * 3)
        np.testing.assert_allclose(linear_inversion(counts).rho, np.eye(2) / 2, atol=1e-12)

    def test_incomplete(self):
        with pytest.raises(IncompleteBasis):
            linear_inversion(CountsRecord(Z_ONLY, [[5, 5]]))

    @settings(max_examples=30)
    @given(st.integers(min_value=0, max_value=2 ** 32), st.sampled_from([1, 2]),
           st.integers(min_value=20, max_value=2000))
    def test_physical(self, seed, n, shots):
        s = random_state(np.random.default_rng(seed), 2 ** n)
        est = linear_inversion(sample_counts(s, MeasurementPlan.pauli(n, shots, seed)))
        assert np.min(np.linalg.eigvalsh(est.rho)) >= -1e-12
        assert abs(np.trace(est.rho) - 1) < 1e-12
        assert np.max(np.abs(est.rho - est.rho.conj().T)) < 1e-14
        assert est.purity() <= 1 + 1e-12


def meter_for(tsv, c, k, alpha=S, beta=S):
    return evolve_qubit_meter(tsv, c, k, QubitMeterState(alpha, beta)).as_state()


class TestExtractModular:
    def test_noiseless(self, rng):
        for _ in range(10):
            pre, post = oracle.rand_tsv(rng, 2, 0.3)
            tsv, c, k = make_tsv(pre, post), oracle.rand_herm(rng, 2), rng.uniform(0, 2)
            cm = modular_value(tsv, c, k).value
            if abs(cm) > 5:
                continue
            bases = [b for _, b in pauli_bases(1)]
            est = linear_inversion_exact(bases, born_probabilities(meter_for(tsv, c, k), bases))
            assert abs(extract_modular(est, S, S).value - cm) < 1e-10

    def test_spin_case_minus_i(self):
        # pre = post = sigma_x eigenstate: sigma_w = 1, modular value -i at k = pi/2
        tsv = make_tsv([S, S], [S, S])
        counts = sample_counts(meter_for(tsv, oracle.SX, math.pi / 2), MeasurementPlan.pauli(1, 10 ** 6, 8))
        est = extract_modular(linear_inversion(counts), S, S)
        assert abs(est.value + 1j) <= 3 * est.stderr
        assert est.shots_total == 3 * 10 ** 6

    def test_stderr_inverse_in_beta(self):
        tsv = make_tsv([S, S], [S, S])
        errs = []
        for beta in (0.3, 0.1, 0.03):
            alpha = math.sqrt(1 - beta ** 2)
            counts = sample_counts(meter_for(tsv, oracle.SX, math.pi / 2, alpha, beta),
                                   MeasurementPlan.pauli(1, 10 ** 5, 21))
            errs.append(extract_modular(linear_inversion(counts), alpha, beta).stderr)
        for (b0, e0), (b1, e1) in zip(zip((0.3, 0.1), errs), zip((0.1, 0.03), errs[1:])):
            assert e1 / e0 == pytest.approx(b0 / b1, rel=0.35)

    def test_conditioning_floor(self):
        # gamma ~ 0.01: the |0> branch has all but vanished
        state = StateVector(HilbertDims((2,)), [0.01, math.sqrt(1 - 1e-4)])
        bases = [b for _, b in pauli_bases(1)]
        est = linear_inversion_exact(bases, born_probabilities(state, bases))
        with pytest.raises(IllConditioned):
            extract_modular(est, S, S)

    def test_beta_zero(self):
        bases = [b for _, b in pauli_bases(1)]
        est = linear_inversion_exact(bases, born_probabilities(plus(), bases))
        with pytest.raises(IllConditioned):
            extract_modular(est, 1, 0)

    def test_bootstrap_deterministic(self):
        counts = sample_counts(plus(), MeasurementPlan.pauli(1, 20000, 5))
        a = extract_modular(linear_inversion(counts), S, S)
        b = extract_modular(linear_inversion(counts), S, S)
        assert a == b and a.stderr > 0

    def test_multi_branches(self):
        beta = 0.5
        state = osaka_meter(hardy_tsv(), list(hardy_projectors()), math.pi, beta).state
        bases = [b for _, b in pauli_bases(2)]
        est = linear_inversion_exact(bases, born_probabilities(state, bases))
        out = extract_modular_multi(est, osaka_initial_state(beta).amps)
        np.testing.assert_allclose([out[j].value for j in (1, 2, 3)], [-1, -1, -3], atol=1e-10)


class TestConvergence:
    def test_error_shrinks_with_shots(self):
        tsv = make_tsv(*oracle.rand_tsv(np.random.default_rng(7), 2, 0.3))
        cm = modular_value(tsv, oracle.SX, 0.9).value
        state = meter_for(tsv, oracle.SX, 0.9)

        def mean_error(shots):
            errs = []
            for seed in range(20):
                counts = sample_counts(state, MeasurementPlan.pauli(1, shots, seed))
                errs.append(abs(extract_modular(linear_inversion(counts), S, S, n_boot=0).value - cm))
            return np.mean(errs)

        assert mean_error(40000) <= 0.6 * mean_error(10000)


class TestPartial:
    def test_vacuum_equiprobable(self):
        pm = partial_tomography_pm(basis_state((2, 2), 0, 0))
        np.testing.assert_allclose(pm.probs, 0.25, atol=1e-15)

    def test_probabilities_sum(self, rng):
        pm = partial_tomography_pm(random_state(rng, (2, 2)))
        assert pm.probs.sum() == pytest.approx(1, abs=1e-14)

    def test_correlations(self):
        c = PMProbabilities(np.array([0.4, 0.3, 0.2, 0.1])).correlations()
        assert c == pytest.approx((0.4, 0.2, 0.0))

    def test_hardy_small_beta_sampled(self):
        beta = 0.05
        state = osaka_meter(hardy_tsv(), list(hardy_projectors()), math.pi, beta).state
        shots = 10 ** 7
        pm = partial_tomography_pm(state, MeasurementPlan.pm(shots, 2024))
        rec = pm_weak_values(pm, beta)
        stat = 3 / (2 * beta * math.sqrt(shots))
        for got, target in ((rec.re_weak_a, 1), (rec.re_weak_b, 1), (rec.re_weak_product, 0)):
            assert abs(got - target) < 5 * beta + stat

    def test_exact_systematic_is_order_beta(self):
        errs = []
        for beta in (0.02, 0.01):
            state = osaka_meter(hardy_tsv(), list(hardy_projectors()), math.pi, beta).state
            rec = pm_weak_values(partial_tomography_pm(state), beta)
            errs.append(max(abs(rec.re_weak_a - 1), abs(rec.re_weak_b - 1), abs(rec.re_weak_product)))
        assert errs[1] < 5 * 0.01
        assert errs[0] / errs[1] == pytest.approx(2, rel=0.1)

    def test_requires_real_beta(self):
        pm = partial_tomography_pm(basis_state((2, 2), 0, 0))
        with pytest.raises(ValueError):
            pm_weak_values(pm, 0.1j)

    def test_requires_two_qubits(self):
        with pytest.raises(ValueError):
            partial_tomography_pm(plus())

    def test_full_tomography_large_beta(self):
        beta = 0.3
        state = osaka_meter(hardy_tsv(), list(hardy_projectors()), math.pi, beta).state
        counts = sample_counts(state, MeasurementPlan.pauli(2, 10 ** 5, 31))
        out = extract_modular_multi(linear_inversion(counts), osaka_initial_state(beta).amps)
        for j, target in ((1, -1), (2, -1), (3, -3)):
            assert abs(out[j].value - target) <= 3 * out[j].stderr
