"""Dense linear algebra substrate: truncated SVD, matrix norms, Procrustes.

Matrices are plain float64 ``numpy.ndarray``s (row-major, 2-d). Every public
operation validates finiteness on the way in and is a pure function of its
inputs, so results are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class SvdConvergenceError(RuntimeError):
    """The SVD iteration failed to converge (numerically pathological input)."""


def make_rng(seed) -> np.random.Generator:
    """Seeded 64-bit generator (PCG64); identical seed, identical stream."""
    return np.random.default_rng(seed)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a finite float64 2-d array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name}: expected a 2-d matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name}: contains NaN or Inf entries")
    return a


@dataclass(frozen=True)
class SvdResult:
    """Top-r singular triplets: u (n, r), s (r,) nonincreasing, v (d, r)."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _fix_signs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Sign convention: first nonzero entry of each column of v nonnegative,
    # so repeated runs are bitwise reproducible.
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            v[:, j] = -col
            u[:, j] = -u[:, j]
    return u, v


def svd_truncated(a, r: int) -> SvdResult:
    """Top-``r`` singular value decomposition of a dense matrix.

    For symmetric input u and v span the same subspace, and
    ``u @ diag(s) @ v.T`` is the best rank-r Frobenius approximant.

    Raises
    ------
    ValueError
        If ``r`` is not in ``[1, min(a.shape)]`` or ``a`` is not finite.
    SvdConvergenceError
        If the underlying iteration does not converge.
    """
    a = as_matrix(a)
    if not 1 <= r <= min(a.shape):
        raise ValueError(f"rank r={r} outside [1, {min(a.shape)}]")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(f"SVD did not converge: {exc}") from exc
    u, v = _fix_signs(u[:, :r].copy(), vt[:r].T.copy())
    return SvdResult(u=u, s=s[:r].copy(), v=v)


def procrustes_align(a, b) -> tuple[np.ndarray, float]:
    """Closed-form orthogonal Procrustes alignment of two d-by-r frames.

    Returns ``(rotation, residual)`` with
    ``rotation = argmin_{R orthogonal} ||a R - b||_F^2`` and ``residual``
    that minimum, computed via the SVD of ``a.T @ b``. A fully degenerate
    cross-product (``a.T @ b == 0``) returns the identity rotation; any
    completion attains the same residual.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    cross = a.T @ b
    norm_a = float(np.sum(a * a))
    norm_b = float(np.sum(b * b))
    if not np.any(cross):
        r = a.shape[1]
        return np.eye(r), norm_a + norm_b
    u, s, vt = np.linalg.svd(cross)
    rotation = u @ vt
    residual = max(norm_a + norm_b - 2.0 * float(s.sum()), 0.0)
    return rotation, residual


class MatrixNorms(NamedTuple):
    frobenius: float
    max_abs: float
    nuclear: float
    operator: float


def norms(a) -> MatrixNorms:
    """Frobenius, max-entry, nuclear and operator norms of a dense matrix.

    Satisfies operator <= frobenius <= nuclear.
    """
    a = as_matrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    return MatrixNorms(
        frobenius=float(np.linalg.norm(a)),
        max_abs=float(np.max(np.abs(a))),
        nuclear=float(s.sum()),
        operator=float(s[0]),
    )
