import json
import math

import numpy as np
import pytest

import oracle
from helpers import local, make_tsv
from modval.core import LocalObservable, OperatorMatrix
from modval.scenarios import (ScenarioReport, child_seed, hardy_projectors, hardy_report, hardy_tsv,
                              osaka_experiment, projector_identities, projector_identities_check,
                              spin_hardy_report, spin_hardy_tsv)
from modval.twostate import ValueEstimate, overlap, weak_value


def q(report, name):
    return report.quantities[name].value


class TestReport:
    def test_target_needs_tolerance(self):
        with pytest.raises(ValueError):
            ScenarioReport("x").add("a", 1.0, 1.0)

    def test_pass_fail(self):
        rep = ScenarioReport("x")
        rep.add("a", 1.0, 1.0, 1e-12)
        assert rep.passed
        rep.add("b", 1.1, 1.0, 1e-12)
        assert not rep.passed and not rep.checks["b"].passed

    def test_csv_columns(self):
        rep = ScenarioReport("x")
        rep.add("a", ValueEstimate(1 + 2j, "tomographic", 0.5), 1, 3.0)
        rep.add("b", 3.0)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "quantity,value_re,value_im,stderr,target_re,target_im,pass"
        assert lines[1] == "a,1.0,2.0,0.5,1.0,0.0,true"
        assert lines[2] == "b,3.0,0.0,0.0,,,"

    def test_json(self):
        rep = hardy_report()
        doc = json.loads(rep.to_json())
        assert doc["scenario"] == "hardy" and doc["passed"] is True
        assert rep.to_json() == hardy_report().to_json()


class TestHardy:
    def test_golden_values(self):
        rep = hardy_report()
        assert rep.passed
        assert abs(q(rep, "(P_A1)_w") - 1) < 1e-12
        assert abs(q(rep, "(P_B2)_w") - 1) < 1e-12
        assert abs(q(rep, "(P_A1 P_B2)_w")) < 1e-12
        for name in ("(P_A1)_w", "(P_B2)_w", "(P_A1 P_B2)_w"):
            assert rep.checks[name].tolerance == 1e-12

    def test_overlap_magnitude(self):
        assert abs(overlap(hardy_tsv())) == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-15)

    def test_encoding(self):
        np.testing.assert_allclose(hardy_tsv().pre.amps, oracle.HARDY_PRE)
        np.testing.assert_allclose(hardy_tsv().post.amps, oracle.HARDY_POST)

    def test_oracle_gaps_reported(self):
        rep = hardy_report()
        gaps = [n for n in rep.quantities if "oracle" in n]
        assert gaps and all(rep.checks[n].passed for n in gaps)


class TestSpinHardy:
    def test_golden_values(self):
        rep = spin_hardy_report()
        assert rep.passed
        for name in ("(sx1)_w", "(sy2)_w", "(sx1 sy2)_w"):
            assert abs(q(rep, name) + 1) < 1e-12

    def test_sum_vanishes(self):
        tsv = spin_hardy_tsv()
        val = weak_value(tsv, oracle.lift(oracle.SX, 0, (2, 2)) + oracle.lift(oracle.SX, 1, (2, 2))).value
        assert abs(val) < 1e-12

    def test_modular_route(self):
        rep = spin_hardy_report()
        assert q(rep, "(sx1)_m k=pi/2") == pytest.approx(1j, abs=1e-12)
        assert q(rep, "(sy2)_m k=pi/2") == pytest.approx(1j, abs=1e-12)

    def test_convention(self):
        post = spin_hardy_tsv().post.amps
        np.testing.assert_allclose(post, np.kron([1, 1j], [1, 1]) / 2)


class TestProjectorIdentities:
    def test_hardy(self):
        rep = projector_identities_check()
        assert rep.passed
        np.testing.assert_allclose([q(rep, f"({n})_w via modular") for n in ("P_A", "P_B", "P_A P_B")],
                                   [1, 1, 0], atol=1e-12)
        np.testing.assert_allclose([q(rep, n) for n in ("(P_A)_m", "(P_B)_m", "(P_A+P_B)_m")],
                                   [-1, -1, -3], atol=1e-12)

    def test_common_eigenstate(self):
        # |0>|1>: P_A = |0><0| gives 1, P_B = |0><0| gives 0
        tsv = make_tsv([0, 1, 0, 0], [0, 1, 0, 0], (2, 2))
        ident = projector_identities(tsv, local(0, oracle.P0), local(1, oracle.P0))
        assert (ident.weak_a, ident.weak_b, ident.weak_ab) == pytest.approx((1, 0, 0), abs=1e-15)
        assert max(ident.residuals) < 1e-15

    def test_random(self, rng):
        worst = 0.0
        for _ in range(100):
            pre, post = oracle.rand_tsv(rng, 4)
            tsv = make_tsv(pre, post, (2, 2))
            ident = projector_identities(tsv, local(0, oracle.rand_rank1_projector(rng)),
                                         local(1, oracle.rand_rank1_projector(rng)))
            worst = max(worst, max(ident.residuals))
        assert worst < 1e-10

    def test_rejects_non_projector(self):
        with pytest.raises(ValueError):
            projector_identities(hardy_tsv(), LocalObservable(0, OperatorMatrix.from_matrix(oracle.SX)),
                                 hardy_projectors()[1])


class TestOsaka:
    def test_partial_small_beta_exact(self):
        rep = osaka_experiment(0.01, 10 ** 5, 0, ("partial",))
        for name, target in (("Re(P_A1)_w", 1), ("Re(P_B2)_w", 1), ("Re(P_A1 P_B2)_w", 0)):
            assert abs(q(rep, f"partial exact {name}") - target) < 5 * 0.01
        assert rep.passed

    def test_full_large_beta(self):
        rep = osaka_experiment(0.5, 10 ** 5, 1, ("full",))
        assert rep.passed
        assert rep.quantities["full (P_A1)_m"].provenance == "tomographic"

    def test_split_mode(self):
        assert osaka_experiment(0.3, 10 ** 5, 2, ("split",)).passed

    def test_oracle_gap(self):
        rep = osaka_experiment(0.2, 1000, 0, ("full",))
        assert q(rep, "oracle gap superposition meter").real < 1e-10

    @pytest.mark.parametrize("beta", [0, 1, 1.5])
    def test_beta_range(self, beta):
        with pytest.raises(ValueError):
            osaka_experiment(beta, 100, 0)

    def test_partial_needs_real_beta(self):
        with pytest.raises(ValueError):
            osaka_experiment(0.1j, 100, 0, ("partial",))
        assert osaka_experiment(0.3j, 10 ** 4, 0, ("full",)).quantities

    def test_deterministic(self):
        a = osaka_experiment(0.3, 2000, 5).to_json()
        assert a == osaka_experiment(0.3, 2000, 5).to_json()
        assert a != osaka_experiment(0.3, 2000, 6).to_json()

    def test_child_seeds_distinct(self):
        seeds = {child_seed(0, k) for k in range(5)}
        assert len(seeds) == 5 and all(0 <= s < 2 ** 64 for s in seeds)
