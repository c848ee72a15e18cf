"""Error functionals and theory-side diagnostics.

All evaluation metrics the experiments report: the normalized Frobenius
error of the completed similarity matrix, the Procrustes rowspace error and
its rank-normalized form, the weighted column-factor error, the three
incoherence constants, and the theoretical error-rate expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matcore import as_matrix, procrustes_align


@dataclass(frozen=True)
class EvalReport:
    """One run's metrics; flattens into the harness CSV columns."""

    theta_err: float
    rowspace_err: float
    rowspace_err_normalized: float
    colfactor_err: float
    mu1: float
    mu2: float
    mu3: float
    alpha_source: str = "theta_max"  # or "ground_truth_x"


def eval_theta(theta_hat, theta_star) -> float:
    """Entry-averaged squared Frobenius error ``(1/d^2) ||theta_hat - theta*||_F^2``."""
    theta_hat = as_matrix(theta_hat, "theta_hat")
    theta_star = as_matrix(theta_star, "theta_star")
    if theta_hat.shape != theta_star.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta_star.shape}")
    diff = theta_hat - theta_star
    d = theta_star.shape[0]
    return float(np.sum(diff * diff)) / (d * d)


def _check_orthonormal(q: np.ndarray, name: str, tol: float = 1e-6) -> None:
    gram = q.T @ q
    if np.max(np.abs(gram - np.eye(q.shape[1]))) > tol:
        raise ValueError(f"{name}: columns are not orthonormal within {tol}")


def eval_rowspace(q_hat, q_true) -> float:
    """Procrustes rowspace error between two orthonormal d-by-r frames.

    ``min over orthogonal R of ||q_hat R - q_true||_F^2``; at most ``2r``,
    attained by orthogonal frames, and invariant to right rotation of either
    argument.
    """
    q_hat = as_matrix(q_hat, "q_hat")
    q_true = as_matrix(q_true, "q_true")
    _check_orthonormal(q_hat, "q_hat")
    _check_orthonormal(q_true, "q_true")
    _, residual = procrustes_align(q_hat, q_true)
    return residual


def eval_colfactors(q_hat, lam_hat, q_true, lam_true) -> float:
    """Column-factor error: ``(1/d) min_R ||q_hat lam_hat^{1/2} R - q_true lam_true^{1/2}||_F^2``.

    The eigenvalue weighting makes this insensitive to directions with small
    weight, unlike the plain rowspace error.
    """
    q_hat = as_matrix(q_hat, "q_hat")
    q_true = as_matrix(q_true, "q_true")
    lam_hat = np.asarray(lam_hat, dtype=np.float64).ravel()
    lam_true = np.asarray(lam_true, dtype=np.float64).ravel()
    if np.any(lam_hat < 0) or np.any(lam_true < 0):
        raise ValueError("eigenvalue weights must be nonnegative")
    a = q_hat * np.sqrt(lam_hat)
    b = q_true * np.sqrt(lam_true)
    _, residual = procrustes_align(a, b)
    return residual / q_true.shape[0]


def incoherence(theta_star, r: int, alpha: float | None = None) -> tuple[float, float, float]:
    """Spikiness constants of a symmetric PSD similarity matrix.

    ``mu1 = d a / ||theta||_F``, ``mu2 = d a / (sigma_r sqrt(r))``,
    ``mu3 = d a sqrt(r) / ||theta||_nuc`` where ``a`` defaults to the max
    absolute entry of ``theta_star`` (pass ``alpha`` explicitly, e.g. the max
    squared entry of X, when the ground truth is available). The nuclear norm
    of the validated-PSD input is its trace, computed exactly; ``sigma_r = 0``
    reports ``mu2 = inf``.
    """
    theta = as_matrix(theta_star, "theta_star")
    d = theta.shape[0]
    if not 1 <= r <= d:
        raise ValueError(f"rank r={r} outside [1, {d}]")
    scale = max(float(np.max(np.abs(theta))), 1e-300)
    if np.max(np.abs(theta - theta.T)) > 1e-8 * scale:
        raise ValueError("theta_star must be symmetric")
    eigs = np.linalg.eigvalsh(theta)
    if eigs[0] < -1e-8 * scale:
        raise ValueError(f"theta_star must be PSD; min eigenvalue {eigs[0]:g}")
    if alpha is None:
        alpha = float(np.max(np.abs(theta)))
    frob = float(np.linalg.norm(theta))
    nuc = float(np.trace(theta))
    sigma_r = max(float(eigs[::-1][r - 1]), 0.0)
    mu1 = d * alpha / frob
    mu2 = math.inf if sigma_r == 0.0 else d * alpha / (sigma_r * math.sqrt(r))
    mu3 = d * alpha * math.sqrt(r) / nuc
    return mu1, mu2, mu3


def theory_rate(alpha: float, r: float, d: float, m: float, delta: float) -> float:
    """Error-rate expression ``alpha^2 r d (log d + delta) / m`` (no constant)."""
    if alpha <= 0 or r <= 0 or d <= 0 or m <= 0:
        raise ValueError("alpha, r, d, m must all be positive")
    return alpha**2 * r * d * (math.log(d) + delta) / m
