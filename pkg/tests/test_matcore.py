import numpy as np
import pytest

from onesided.matcore import (
    as_matrix,
    make_rng,
    norms,
    procrustes_align,
    svd_truncated,
)


def jacobi_eigh(a, sweeps=100, tol=1e-14):
    """Independent oracle: cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns eigenvalues (descending) and eigenvectors, computed without any
    LAPACK factorization.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    vecs = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(a**2) - np.sum(np.diag(a) ** 2))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-30:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                vecs = vecs @ rot
    order = np.argsort(np.diag(a))[::-1]
    return np.diag(a)[order], vecs[:, order]


def random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


class TestSvdTruncated:
    def test_identity(self):
        res = svd_truncated(np.eye(3), 3)
        assert np.allclose(res.s, np.ones(3), atol=1e-12)
        # permutation-signed identity: u and v agree and |v| is a permutation
        assert np.allclose(res.u, res.v, atol=1e-12)
        assert np.allclose(np.abs(res.v) @ np.ones(3), np.ones(3), atol=1e-12)
        recon = res.u @ np.diag(res.s) @ res.v.T
        assert np.allclose(recon, np.eye(3), atol=1e-12)

    def test_rank_one_outer_product(self):
        rng = make_rng(3)
        x = rng.standard_normal(5)
        x *= 2.0 / np.linalg.norm(x)
        y = rng.standard_normal(7)
        y *= 3.0 / np.linalg.norm(y)
        res = svd_truncated(np.outer(x, y), 1)
        assert res.s[0] == pytest.approx(6.0, abs=1e-10)
        # up to sign
        assert min(
            np.linalg.norm(res.u[:, 0] - x / 2), np.linalg.norm(res.u[:, 0] + x / 2)
        ) < 1e-10
        assert min(
            np.linalg.norm(res.v[:, 0] - y / 3), np.linalg.norm(res.v[:, 0] + y / 3)
        ) < 1e-10

    def test_psd_matches_jacobi_oracle(self):
        rng = make_rng(8)
        b = rng.standard_normal((8, 8))
        a = b @ b.T
        res = svd_truncated(a, 8)
        recon = res.u @ np.diag(res.s) @ res.v.T
        assert np.linalg.norm(recon - a) <= 1e-9
        eig_oracle, _ = jacobi_eigh(a)
        assert np.allclose(res.s, eig_oracle, rtol=1e-9, atol=1e-9)

    def test_exact_rank_r_reconstruction(self):
        rng = make_rng(11)
        for _ in range(5):
            u = rng.standard_normal((12, 3))
            v = rng.standard_normal((9, 3))
            a = u @ v.T
            res = svd_truncated(a, 3)
            recon = res.u @ np.diag(res.s) @ res.v.T
            assert np.linalg.norm(recon - a) / np.linalg.norm(a) <= 1e-9

    def test_orthonormal_columns(self):
        rng = make_rng(5)
        a = rng.standard_normal((10, 6))
        res = svd_truncated(a, 4)
        assert np.max(np.abs(res.u.T @ res.u - np.eye(4))) <= 1e-10
        assert np.max(np.abs(res.v.T @ res.v - np.eye(4))) <= 1e-10
        assert np.all(np.diff(res.s) <= 1e-12)
        assert np.all(res.s >= 0)

    def test_sign_convention_reproducible(self):
        rng = make_rng(6)
        a = rng.standard_normal((7, 7))
        r1 = svd_truncated(a, 5)
        r2 = svd_truncated(a.copy(), 5)
        assert np.array_equal(r1.v, r2.v)
        for j in range(5):
            col = r1.v[:, j]
            nz = np.flatnonzero(np.abs(col) > 1e-12)
            assert col[nz[0]] >= 0

    def test_bad_rank_rejected(self):
        with pytest.raises(ValueError):
            svd_truncated(np.eye(3), 4)
        with pytest.raises(ValueError):
            svd_truncated(np.eye(3), 0)

    def test_nonfinite_rejected(self):
        a = np.eye(3)
        a[0, 0] = np.nan
        with pytest.raises(ValueError):
            svd_truncated(a, 2)


class TestProcrustes:
    def test_identical_frames(self):
        rng = make_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((6, 3)))
        rot, resid = procrustes_align(q, q)
        assert np.allclose(rot, np.eye(3), atol=1e-10)
        assert resid == pytest.approx(0.0, abs=1e-10)

    def test_rotation_recovered(self):
        rng = make_rng(1)
        q, _ = np.linalg.qr(rng.standard_normal((8, 3)))
        r0 = random_orthogonal(3, rng)
        rot, resid = procrustes_align(q @ r0, q)
        assert resid == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(rot, r0.T, atol=1e-9)

    def test_r1_sign_enumeration_oracle(self):
        rng = make_rng(2)
        for _ in range(50):
            a = rng.standard_normal((5, 1))
            a /= np.linalg.norm(a)
            b = rng.standard_normal((5, 1))
            b /= np.linalg.norm(b)
            _, resid = procrustes_align(a, b)
            oracle = min(
                np.linalg.norm(s * a - b) ** 2 for s in (1.0, -1.0)
            )
            assert resid == pytest.approx(oracle, abs=1e-9)

    def test_residual_invariant_under_right_rotation(self):
        rng = make_rng(4)
        for _ in range(10):
            a = rng.standard_normal((7, 3))
            b = rng.standard_normal((7, 3))
            r0 = random_orthogonal(3, rng)
            _, resid1 = procrustes_align(a @ r0, b)
            _, resid2 = procrustes_align(a, b)
            assert resid1 == pytest.approx(resid2, abs=1e-9)

    def test_degenerate_returns_identity(self):
        a = np.zeros((4, 2))
        a[0, 0] = 1.0
        b = np.zeros((4, 2))
        b[1, 1] = 1.0
        b[:, 0] = 0.0
        # construct a.T @ b == 0
        a = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
        b = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(a.T @ b, 0)
        rot, resid = procrustes_align(a, b)
        assert np.array_equal(rot, np.eye(2))
        assert resid == pytest.approx(np.sum(a * a) + np.sum(b * b))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            procrustes_align(np.eye(3), np.eye(4))


class TestNorms:
    def test_identity(self):
        d = 5
        result = norms(np.eye(d))
        assert result.frobenius == pytest.approx(np.sqrt(d))
        assert result.max_abs == 1.0
        assert result.nuclear == pytest.approx(d)
        assert result.operator == pytest.approx(1.0)

    def test_zero(self):
        result = norms(np.zeros((3, 4)))
        assert result == (0.0, 0.0, 0.0, 0.0)

    def test_matches_eigh_oracle(self):
        # independent route: singular values from the eigendecomposition of A^T A
        rng = make_rng(7)
        a = rng.standard_normal((6, 6))
        result = norms(a)
        eigs = np.linalg.eigvalsh(a.T @ a)
        svals = np.sqrt(np.maximum(eigs, 0.0))[::-1]
        assert result.nuclear == pytest.approx(svals.sum(), rel=1e-9)
        assert result.operator == pytest.approx(svals[0], rel=1e-9)
        assert result.frobenius == pytest.approx(
            np.sqrt(sum(x * x for x in a.ravel())), rel=1e-12
        )

    def test_ordering_property(self):
        rng = make_rng(9)
        for _ in range(1000):
            n, d = rng.integers(1, 8, size=2)
            a = rng.standard_normal((n, d))
            result = norms(a)
            assert result.operator <= result.frobenius * (1 + 1e-12) + 1e-15
            assert result.frobenius <= result.nuclear * (1 + 1e-12) + 1e-15


def test_as_matrix_validates():
    with pytest.raises(ValueError):
        as_matrix(np.ones(3))
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.inf, 1.0]]))


def test_rng_determinism():
    a = make_rng(1234).standard_normal(10)
    b = make_rng(1234).standard_normal(10)
    assert np.array_equal(a, b)
