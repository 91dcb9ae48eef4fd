import json
import math

import numpy as np
import pytest

from conftest import eigh_power, rand_density
from qrenyi.divergences import alpha_relative_renyi, sandwiched_renyi
from qrenyi.errors import SupportMismatch
from qrenyi.verify import (
    FuzzReport,
    alt_sides,
    check_alt,
    check_lemma3,
    counterexample_pair,
    counterexample_report,
    dpi_instance,
    fuzz_dpi,
    fuzz_joint_convexity,
    limit_at_zero,
    lower_bound_diagnostics,
    pair_instance,
)

LOG2_1P5 = math.log2(1.5)


class TestLimitAtZero:
    def test_equal_support_qutrit(self, rng):
        rho, sigma = rand_density(rng, 3), rand_density(rng, 3)
        estimate, samples, relation = limit_at_zero(rho, sigma)
        assert relation.value == "equal"
        assert abs(estimate - (-math.log2(np.trace(sigma).real))) <= 1e-3
        assert [a for a, _ in samples] == [1e-1, 1e-2, 1e-3, 1e-4]

    def test_counterexample_pair(self):
        estimate, _, relation = limit_at_zero(*counterexample_pair(0.5))
        assert relation.value == "rho_inside_sigma"
        assert abs(estimate - (-LOG2_1P5)) <= 1e-3

    def test_identical_states(self, rng):
        rho = rand_density(rng, 3)
        _, samples, _ = limit_at_zero(rho, rho)
        assert all(abs(v) <= 1e-12 for _, v in samples)

    def test_rejects_non_decreasing_ladder(self, rng):
        rho = rand_density(rng, 2)
        with pytest.raises(ValueError):
            limit_at_zero(rho, rho, alphas=(1e-3, 1e-2))


class TestPetzBound:
    def test_qubit_pairs(self):
        for seed in range(100):
            rho, sigma = pair_instance(seed, dims=(2,))
            assert check_lemma3(rho, sigma, seed=seed).ok

    def test_commuting_equality(self, rng):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        rep = check_lemma3(np.diag(p), np.diag(q))
        assert rep.ok and abs(rep.worst_margin) <= 1e-9

    def test_counterexample_pair_consistent(self):
        rho, sigma = counterexample_pair(0.5)
        s = sandwiched_renyi(rho, sigma, 0.01).value
        p = alpha_relative_renyi(rho, sigma, 0.01).value
        assert s < 0 <= p
        assert check_lemma3(rho, sigma, alpha_grid=(0.01,)).ok

    def test_incomparable_supports_skipped(self):
        rep = check_lemma3(np.eye(2) / 2, np.diag([1.0, 0.0]))
        assert rep.skipped == 1 and rep.trials == 0


class TestLowerBoundDiagnostics:
    def test_random_qutrit(self, rng):
        rho, sigma = rand_density(rng, 3), rand_density(rng, 3)
        diag = lower_bound_diagnostics(rho, sigma, 0.1)
        assert diag.pinching_margin >= -1e-9 and diag.pinching_holds
        assert abs(diag.mu.sum() - 1) <= 1e-10 and np.all(diag.mu >= 0)
        d_alpha, lower, d0_value = diag.bound_chain
        assert d_alpha >= lower - 1e-9
        assert diag.trace_inequality_gap >= -1e-9
        assert d0_value == pytest.approx(0.0, abs=1e-12)

    def test_c_alpha_matches_direct_product(self, rng):
        rho, sigma = rand_density(rng, 3), rand_density(rng, 3)
        diag = lower_bound_diagnostics(rho, sigma, 0.2)
        sb = eigh_power(sigma, 2.0)
        np.testing.assert_allclose(diag.c_alpha.data, sb @ rho @ sb, atol=1e-12)

    def test_commuting_margin(self, rng):
        n, alpha = 4, 0.2
        beta = (1 - alpha) / (2 * alpha)
        r, s = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        diag = lower_bound_diagnostics(np.diag(r), np.diag(s), alpha)
        # n Q - C = diag((n - 1) s^{2b} r) in the common eigenbasis
        assert diag.pinching_margin == pytest.approx((n - 1) * np.min(s ** (2 * beta) * r), rel=1e-8)

    def test_maximally_mixed(self):
        n, alpha = 3, 0.05
        diag = lower_bound_diagnostics(np.eye(n) / n, np.eye(n) / n, alpha)
        np.testing.assert_allclose(diag.mu, 1 / n, atol=1e-15)
        beta = (1 - alpha) / (2 * alpha)
        np.testing.assert_allclose(diag.q_alpha.data, np.eye(n) * (1 / n) ** (2 * beta) / n, rtol=1e-12)

    def test_equal_support_rank_deficient(self, rng):
        x = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        w = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        sigma = x @ (w @ w.conj().T) @ x.conj().T
        sigma *= 0.7 / np.trace(sigma).real
        diag = lower_bound_diagnostics(rho, sigma, 0.05)
        assert diag.pinching_holds
        assert abs(diag.mu.sum() - 1) <= 1e-10
        assert diag.bound_chain[2] == pytest.approx(-math.log2(0.7), abs=1e-9)

    def test_unequal_supports_rejected(self):
        with pytest.raises(SupportMismatch):
            lower_bound_diagnostics(*counterexample_pair(0.5), 0.1)


class TestCounterexample:
    def test_small_alpha(self):
        rep = counterexample_report(0.5, 1e-4)
        assert rep.ok
        assert abs(rep.d_alpha_numeric - (-LOG2_1P5)) <= 1e-3
        assert rep.d0_value == 0.0

    def test_small_c_still_negative(self):
        rep = counterexample_report(0.01, 1e-5)
        assert rep.limit_closed == pytest.approx(-0.014355292977070041, abs=1e-15)
        assert rep.limit_closed < 0

    @pytest.mark.parametrize("c", [0.1, 0.3, 0.5, 0.9])
    def test_d0_is_zero(self, c):
        assert counterexample_report(c, 0.3).d0_value == 0.0

    def test_lambda1_moderate_alpha(self):
        rep = counterexample_report(0.5, 0.25)
        assert rep.lambda1 == pytest.approx(0.5 * (1.5**3 + 0.5**3), rel=1e-14)

    def test_json_fields(self):
        doc = json.loads(counterexample_report(0.5, 0.1).to_json())
        for key in ("c", "alpha", "lambda1", "d_alpha_numeric", "d_alpha_closed", "limit_closed", "d0_value", "match_tol"):
            assert key in doc
        assert "lambda2" not in doc

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            counterexample_report(1.0, 0.1)
        with pytest.raises(ValueError):
            counterexample_report(0.5, 1.0)


class TestAlt:
    def test_r_one_boundary(self, rng):
        a, b = rand_density(rng, 3), rand_density(rng, 3)
        for q in (0.5, 1.0, 2.0):
            rep = check_alt(a, b, 1.0, q)
            assert rep.ok and abs(rep.worst_margin) <= 1e-10

    def test_branch_ii_gives_sandwiched_petz_estimate(self, rng):
        rho, sigma = rand_density(rng, 2), rand_density(rng, 2)
        alpha = 0.3
        beta = (1 - alpha) / (2 * alpha)
        b = eigh_power(sigma, 2 * beta)
        rep = check_alt(rho, b, alpha, 1.0)
        assert rep.ok and rep.property == "alt_ii"
        lhs, rhs = rep_sides(rho, b, alpha)
        sb = eigh_power(sigma, beta)
        direct_lhs = np.sum(np.clip(np.linalg.eigvalsh(sb @ rho @ sb), 0, None) ** alpha)
        direct_rhs = np.trace(eigh_power(rho, alpha) @ eigh_power(sigma, 1 - alpha)).real
        assert lhs == pytest.approx(direct_lhs, rel=1e-10)
        assert rhs == pytest.approx(direct_rhs, rel=1e-10)
        assert lhs >= rhs

    @pytest.mark.parametrize("r,q", [(0.3, 1.0), (2.0, 0.5), (1.5, 2.0)])
    def test_commuting_scalar_oracle(self, rng, r, q):
        a, b = rng.uniform(0.1, 1, 3), rng.uniform(0.1, 1, 3)
        lhs, rhs = rep_sides(np.diag(a), np.diag(b), r, q)
        assert lhs == pytest.approx(np.sum((a * b) ** (r * q)), abs=1e-10)
        assert rhs == pytest.approx(np.sum((b**r * a**r) ** q), abs=1e-10)


def rep_sides(a, b, r, q=1.0):
    return alt_sides(a, b, r, q)


class TestFuzz:
    def test_dpi_half_conforms(self):
        rep = fuzz_dpi(0.5, 1000, seed=17)
        assert rep.ok and rep.trials + rep.skipped == 1000

    def test_dpi_unitary_equality(self):
        rep = fuzz_dpi(2.0, 100, seed=3, unitary_only=True)
        assert rep.ok and abs(rep.worst_margin) <= 1e-9

    def test_dpi_violation_found_and_replayable(self):
        rep = fuzz_dpi(0.3, 10_000, seed=0, stop_after=1)
        assert rep.violations
        seed, alpha, lhs, rhs, margin = rep.violations[0]
        assert margin > 1e-6
        rho, sigma, ch = dpi_instance(seed)
        assert sandwiched_renyi(rho, sigma, alpha).value == rhs
        assert sandwiched_renyi(ch(rho), ch(sigma), alpha).value == lhs

    def test_joint_convexity_size_one(self):
        rep = fuzz_joint_convexity(0.7, 20, seed=1, mixture_size=1)
        assert rep.ok and abs(rep.worst_margin) <= 1e-12

    def test_joint_convexity_half(self):
        assert fuzz_joint_convexity(0.5, 1000, seed=2, mixture_size=2, dims=(2,)).ok

    def test_joint_convexity_identical_pairs(self, rng):
        rho, sigma = rand_density(rng, 2), rand_density(rng, 2)
        p = np.array([0.3, 0.7])
        lhs = sandwiched_renyi(p[0] * rho + p[1] * rho, p[0] * sigma + p[1] * sigma, 0.6).value
        rhs = sandwiched_renyi(rho, sigma, 0.6).value
        assert abs(lhs - rhs) <= 1e-9

    def test_joint_convexity_alpha_range(self):
        with pytest.raises(ValueError):
            fuzz_joint_convexity(0.3, 1)

    def test_report_merge_and_json(self):
        a, b = FuzzReport("dpi"), FuzzReport("dpi")
        a.record(1, 0.3, 1.0, 0.5, 0.5)
        b.record(2, 0.3, 0.1, 0.5, -0.4)
        m = a.merge(b)
        assert m.trials == 2 and len(m.violations) == 1 and m.worst_margin == 0.5
        doc = json.loads(m.to_json())
        assert set(doc) == {"property", "trials", "violations", "worst_margin", "skipped"}
        assert set(doc["violations"][0]) == {"seed", "alpha", "lhs", "rhs", "margin"}
        with pytest.raises(ValueError):
            a.merge(FuzzReport("lemma3"))
