import math

import numpy as np
import pytest

from onesided.datagen import gen_gaussian, gen_special
from onesided.matcore import make_rng
from onesided.metrics import (
    eval_colfactors,
    eval_rowspace,
    eval_theta,
    incoherence,
    theory_rate,
)


def random_frame(d, r, rng):
    q, _ = np.linalg.qr(rng.standard_normal((d, r)))
    return q


def random_orthogonal(r, rng):
    q, rr = np.linalg.qr(rng.standard_normal((r, r)))
    return q * np.sign(np.diag(rr))


class TestEvalTheta:
    def test_identical(self):
        a = make_rng(0).standard_normal((4, 4))
        assert eval_theta(a, a) == 0.0

    def test_all_ones_offset(self):
        a = make_rng(1).standard_normal((5, 5))
        assert eval_theta(a + 1.0, a) == pytest.approx(1.0, rel=1e-12)

    def test_matches_double_loop(self):
        rng = make_rng(2)
        a = rng.standard_normal((6, 6))
        b = rng.standard_normal((6, 6))
        oracle = sum(
            (a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(6)
        ) / 36
        assert eval_theta(a, b) == pytest.approx(oracle, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            eval_theta(np.zeros((3, 3)), np.zeros((4, 4)))


class TestEvalRowspace:
    def test_identical_frames(self):
        q = random_frame(8, 3, make_rng(3))
        assert eval_rowspace(q, q) == pytest.approx(0.0, abs=1e-12)

    def test_rotated_frame_is_zero(self):
        rng = make_rng(4)
        q = random_frame(8, 3, rng)
        r0 = random_orthogonal(3, rng)
        assert eval_rowspace(q @ r0, q) == pytest.approx(0.0, abs=1e-9)

    def test_orthogonal_complement_is_2r(self):
        # trace identity: residual = 2r - 2 sum sigma(qhat^T q) = 2r at zero overlap
        rng = make_rng(5)
        full = random_frame(10, 6, rng)
        q1, q2 = full[:, :3], full[:, 3:]
        assert eval_rowspace(q1, q2) == pytest.approx(6.0, rel=1e-9)

    def test_rotation_invariance_both_sides(self):
        rng = make_rng(6)
        q1 = random_frame(9, 3, rng)
        q2 = random_frame(9, 3, rng)
        base = eval_rowspace(q1, q2)
        for _ in range(5):
            r0 = random_orthogonal(3, rng)
            assert eval_rowspace(q1 @ r0, q2) == pytest.approx(base, abs=1e-9)
            assert eval_rowspace(q1, q2 @ r0) == pytest.approx(base, abs=1e-9)

    def test_symmetry(self):
        rng = make_rng(7)
        q1 = random_frame(9, 4, rng)
        q2 = random_frame(9, 4, rng)
        assert eval_rowspace(q1, q2) == pytest.approx(eval_rowspace(q2, q1), abs=1e-9)

    def test_bounded_by_2r(self):
        rng = make_rng(8)
        for _ in range(20):
            q1 = random_frame(7, 2, rng)
            q2 = random_frame(7, 2, rng)
            assert 0.0 <= eval_rowspace(q1, q2) <= 4.0 + 1e-9

    def test_non_orthonormal_rejected(self):
        q = random_frame(5, 2, make_rng(9))
        with pytest.raises(ValueError):
            eval_rowspace(2.0 * q, q)


class TestEvalColfactors:
    def test_identical(self):
        rng = make_rng(10)
        q = random_frame(6, 2, rng)
        lam = np.array([3.0, 1.0])
        assert eval_colfactors(q, lam, q, lam) == pytest.approx(0.0, abs=1e-12)

    def test_identity_weights_reduce_to_rowspace(self):
        rng = make_rng(11)
        q1 = random_frame(7, 3, rng)
        q2 = random_frame(7, 3, rng)
        ones = np.ones(3)
        assert eval_colfactors(q1, ones, q2, ones) == pytest.approx(
            eval_rowspace(q1, q2) / 7, abs=1e-9
        )

    def test_matches_closed_form_trace_oracle(self):
        rng = make_rng(12)
        q1 = random_frame(8, 2, rng)
        q2 = random_frame(8, 2, rng)
        l1 = np.array([4.0, 2.0])
        l2 = np.array([5.0, 1.0])
        a = q1 * np.sqrt(l1)
        b = q2 * np.sqrt(l2)
        svals = np.linalg.svd(a.T @ b, compute_uv=False)
        oracle = (np.sum(a * a) + np.sum(b * b) - 2 * svals.sum()) / 8
        assert eval_colfactors(q1, l1, q2, l2) == pytest.approx(oracle, rel=1e-9)

    def test_negative_weights_rejected(self):
        q = random_frame(5, 2, make_rng(13))
        with pytest.raises(ValueError):
            eval_colfactors(q, np.array([1.0, -0.5]), q, np.ones(2))


class TestIncoherence:
    def test_all_ones_exactly_one(self):
        for d in (10, 50):
            mu1, mu2, mu3 = incoherence(np.ones((d, d)), 1)
            assert (mu1, mu2, mu3) == (1.0, 1.0, 1.0)

    def test_single_zero_bounds(self):
        gt = gen_special("single_zero", 100, 10)
        mu1, mu2, mu3 = incoherence(gt.theta_star, 2)
        assert mu1 <= 2.0 and mu3 <= 2.0
        assert mu2 > 10.0  # exceeds d

    def test_gaussian_factors_soft_range(self):
        # soft check: mu1 is sqrt(r) up to log factors for Gaussian factors
        gt = gen_gaussian(100_000, 100, 4, make_rng(14))
        mu1, _, _ = incoherence(gt.theta_star, 4)
        assert 1.0 <= mu1 <= math.sqrt(4) * math.log(100)

    def test_exact_alpha_override(self):
        gt = gen_gaussian(5000, 20, 2, make_rng(15))
        alpha = float(np.max(gt.x**2))
        mu1_a, _, _ = incoherence(gt.theta_star, 2, alpha=alpha)
        mu1_b, _, _ = incoherence(gt.theta_star, 2)
        assert mu1_a >= mu1_b  # max X^2 >= max |theta*| for Gram matrices

    def test_rank_deficient_reports_inf(self):
        theta = np.zeros((4, 4))
        theta[0, 0] = 1.0
        _, mu2, _ = incoherence(theta, 2)
        assert math.isinf(mu2)

    def test_asymmetric_rejected(self):
        a = np.eye(3)
        a[0, 1] = 0.5
        with pytest.raises(ValueError):
            incoherence(a, 1)

    def test_non_psd_rejected(self):
        a = -np.eye(3)
        with pytest.raises(ValueError):
            incoherence(a, 1)


class TestTheoryRate:
    def test_doubling_m_halves(self):
        base = theory_rate(2.0, 3, 50, 1000, 1.5)
        assert theory_rate(2.0, 3, 50, 2000, 1.5) == pytest.approx(base / 2, rel=1e-15)

    def test_unit_cancellation(self):
        assert theory_rate(1.0, 1, math.e, math.e, 0.0) == pytest.approx(1.0, rel=1e-15)

    def test_rank_ratio(self):
        r = theory_rate(1.5, 4, 30, 500, 2.0) / theory_rate(1.5, 16, 30, 500, 2.0)
        assert r == pytest.approx(0.25, rel=1e-15)

    def test_positivity_checks(self):
        with pytest.raises(ValueError):
            theory_rate(0.0, 1, 10, 100, 1.0)
