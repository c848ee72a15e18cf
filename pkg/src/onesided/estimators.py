"""Estimators for the column-similarity matrix and its factors.

The target is ``theta* = (1/m) X^T X`` for a tall m-by-d matrix X observed at
k random entries per row. Every estimator here consumes either the raw
observed values or the sufficient statistic :class:`EmpiricalTarget`
(entrywise averages of observed products plus their co-occurrence counts):

* :func:`solve_factored` -- symmetric low-rank completion, Adam on V with
  theta = V V^T (our method, non-convex form).
* :func:`solve_convex` -- nuclear-norm-regularized completion by proximal
  gradient with singular-value soft-thresholding (reference-scale solver).
* :func:`baseline_full_completion` -- two-factor vanilla matrix completion
  on the observed entries of X.
* :func:`baseline_direct` / :func:`baseline_no_diagonal` -- direct rank-r
  factorization of the masked Gram matrix, with or without its diagonal.

``x_obs`` arguments accept either the full (m, d) matrix (entries outside the
observation pattern are ignored) or an (m, k) array of observed values
aligned with ``obs.cols``; the latter avoids materializing X for large m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .masking import (
    CooccurrenceWeights,
    ObservationSet,
    _pair_indices,
    observed_values,
)
from .matcore import SvdResult, as_matrix, svd_truncated

_LOG_EVERY = 100
_CHUNK_BUDGET = 8_000_000


class SolverDivergenceError(RuntimeError):
    """Non-finite loss encountered; the learning rate is likely too high."""


@dataclass(frozen=True)
class EmpiricalTarget:
    """Entrywise empirical estimate of theta* plus its observation counts.

    ``theta_emp[j1, j2]`` is the mean of ``X[i, j1] * X[i, j2]`` over the rows
    observing both columns, and 0 where the count ``weights.w[j1, j2]`` is 0.
    This pair is the sufficient statistic for all weighted-loss estimators.
    """

    theta_emp: np.ndarray
    weights: CooccurrenceWeights
    m: int

    @property
    def d(self) -> int:
        return self.theta_emp.shape[0]


@dataclass
class SolverConfig:
    """Hyperparameters shared by the iterative solvers.

    ``lambda_reg=None`` resolves to the theory default
    ``16 * alpha * sqrt((log d + delta) / (d m))`` with ``delta = log d`` in
    :func:`solve_convex`, and to 0.1 (the grid-searched value) in
    :func:`baseline_full_completion`. ``alpha_cap=None`` resolves to the max
    absolute entry of the empirical target.
    """

    rank: int
    steps: int = 10_000
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_adam: float = 1e-8
    lambda_reg: float | None = None
    alpha_cap: float | None = None
    init_mode: str = "spectral"  # or "gaussian"

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.init_mode not in ("spectral", "gaussian"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")


@dataclass(frozen=True)
class FactorEstimate:
    """Recovered top-r factors: q (d, r) orthonormal, lam (r,) nonincreasing."""

    q: np.ndarray
    lam: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class ThetaEstimate:
    """A d-by-d estimate with its top-r factors and the logged loss trace."""

    theta_hat: np.ndarray
    factors: FactorEstimate
    loss_trace: np.ndarray
    converged: bool = True
    warnings: tuple[str, ...] = ()


def _factor_estimate(svd: SvdResult) -> FactorEstimate:
    degenerate = bool(svd.s[-1] <= 1e-12 * max(float(svd.s[0]), 1.0))
    return FactorEstimate(q=svd.v, lam=svd.s, degenerate=degenerate)


def _accumulate_gram(vals: np.ndarray, obs: ObservationSet) -> tuple[np.ndarray, np.ndarray]:
    """Sums of observed products and their counts, both (d, d).

    The product sums equal ``P_E(X)^T P_E(X)`` exactly; the counts equal the
    Gram of the 0/1 mask.
    """
    d = obs.d
    numer = np.zeros(d * d)
    count = np.zeros(d * d)
    chunk = max(1, _CHUNK_BUDGET // (obs.k_per_row**2))
    for lo in range(0, obs.m, chunk):
        c = obs.cols[lo : lo + chunk]
        v = vals[lo : lo + chunk]
        j1, j2 = _pair_indices(c)
        k = c.shape[1]
        prod = (np.repeat(v, k, axis=1) * np.tile(v, (1, k))).ravel()
        flat = j1 * d + j2
        numer += np.bincount(flat, weights=prod, minlength=d * d)
        count += np.bincount(flat, minlength=d * d)
    return numer.reshape(d, d), count.reshape(d, d)


def empirical_target(x_obs, obs: ObservationSet) -> EmpiricalTarget:
    """Entrywise average of observed products; zero where never co-observed.

    Equals ``[P_E(X)^T P_E(X)]`` divided elementwise by the co-occurrence
    counts where those are positive (division by a zero count is a no-op and
    the entry stays 0). With full observation (k = d) this is exactly
    ``(1/m) X^T X``.
    """
    vals = observed_values(x_obs, obs)
    numer, count = _accumulate_gram(vals, obs)
    theta = np.divide(numer, count, out=np.zeros_like(numer), where=count > 0)
    return EmpiricalTarget(theta_emp=theta, weights=CooccurrenceWeights(w=count), m=obs.m)


def loss_rowform(theta, x_obs, obs: ObservationSet) -> float:
    """Row-sum form of the completion loss for two observations per row.

    ``(1/4m)`` times the sum over rows of the four squared residuals: the two
    symmetric off-diagonal terms against the product of the row's observed
    values and the two diagonal terms against their squares. Only defined for
    k = 2; use :func:`loss_weighted` for the general form.
    """
    if obs.k_per_row != 2:
        raise ValueError(f"row-form loss requires k=2, got k={obs.k_per_row}")
    theta = as_matrix(theta, "theta")
    vals = observed_values(x_obs, obs)
    a = obs.cols[:, 0]
    b = obs.cols[:, 1]
    xa = vals[:, 0]
    xb = vals[:, 1]
    prod = xa * xb
    total = (
        np.sum((theta[a, b] - prod) ** 2)
        + np.sum((theta[b, a] - prod) ** 2)
        + np.sum((theta[a, a] - xa * xa) ** 2)
        + np.sum((theta[b, b] - xb * xb) ** 2)
    )
    return float(total) / (4.0 * obs.m)


def loss_weighted(theta, target: EmpiricalTarget) -> float:
    """Count-weighted squared loss against the empirical target.

    ``(1/4m) * sum_{j1,j2} w[j1,j2] (theta[j1,j2] - theta_emp[j1,j2])^2``.
    For k = 2 this equals the row-sum loss minus a theta-independent
    constant; it is also the natural generalization to k > 2.
    """
    theta = as_matrix(theta, "theta")
    diff = theta - target.theta_emp
    return float(np.sum(target.weights.w * diff * diff)) / (4.0 * target.m)


def loss_gradient(theta, target: EmpiricalTarget) -> np.ndarray:
    """Gradient of :func:`loss_weighted`: ``(1/2m) w .* (theta - theta_emp)``."""
    theta = as_matrix(theta, "theta")
    return target.weights.w * (theta - target.theta_emp) / (2.0 * target.m)


class _Adam:
    """Adam for a single dense parameter array."""

    def __init__(self, shape, cfg: SolverConfig):
        self.m1 = np.zeros(shape)
        self.m2 = np.zeros(shape)
        self.t = 0
        self.lr = cfg.learning_rate
        self.b1 = cfg.beta1
        self.b2 = cfg.beta2
        self.eps = cfg.epsilon_adam

    def step(self, param: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m1 = self.b1 * self.m1 + (1.0 - self.b1) * grad
        self.m2 = self.b2 * self.m2 + (1.0 - self.b2) * grad * grad
        m_hat = self.m1 / (1.0 - self.b1**self.t)
        v_hat = self.m2 / (1.0 - self.b2**self.t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _trace_warning(trace: list[float]) -> tuple[str, ...]:
    # Nonincreasing over the trailing window of 10 logged points, tolerating
    # relative jitter of 1e-6 near convergence.
    tail = trace[-10:]
    for prev, cur in zip(tail, tail[1:]):
        if cur > prev * (1.0 + 1e-6) + 1e-300:
            return ("loss trace increased within the trailing window",)
    return ()


def _spectral_init(target: EmpiricalTarget, rank: int) -> np.ndarray:
    hollow = target.theta_emp.copy()
    np.fill_diagonal(hollow, 0.0)
    res = svd_truncated(hollow, rank)
    return res.v * np.sqrt(res.s)


def solve_factored(
    target: EmpiricalTarget, cfg: SolverConfig, rng: np.random.Generator
) -> ThetaEstimate:
    """Symmetric factored completion: Adam on V minimizing the weighted loss
    of ``V V^T``.

    The diagonal of the loss controls the factor norms, so no explicit L2
    term is needed. The loss is logged every 100 steps; a non-finite value
    aborts with :class:`SolverDivergenceError`. The returned estimate is
    ``V V^T`` (symmetric PSD by construction) with its top-r SVD as factors.
    """
    d = target.d
    if cfg.rank > d:
        raise ValueError(f"rank {cfg.rank} exceeds d={d}")
    if cfg.init_mode == "spectral":
        v = _spectral_init(target, cfg.rank)
    else:
        v = rng.normal(0.0, 0.1 / math.sqrt(d), size=(d, cfg.rank))
    w = target.weights.w
    m = target.m
    adam = _Adam(v.shape, cfg)
    trace: list[float] = []
    for t in range(1, cfg.steps + 1):
        theta = v @ v.T
        grad = (w * (theta - target.theta_emp)) @ v / m
        v = adam.step(v, grad)
        if t % _LOG_EVERY == 0 or t == cfg.steps:
            theta = v @ v.T
            loss = (
                loss_weighted(theta, target) if np.all(np.isfinite(theta)) else math.inf
            )
            if not math.isfinite(loss):
                raise SolverDivergenceError(
                    f"non-finite loss at step {t}; try a smaller learning rate"
                )
            trace.append(loss)
    theta_hat = v @ v.T
    theta_hat = (theta_hat + theta_hat.T) / 2.0
    return ThetaEstimate(
        theta_hat=theta_hat,
        factors=_factor_estimate(svd_truncated(theta_hat, cfg.rank)),
        loss_trace=np.asarray(trace),
        warnings=_trace_warning(trace),
    )


def default_lambda(alpha: float, d: int, m: int, delta: float | None = None) -> float:
    """Theory default for the nuclear-norm weight:
    ``16 alpha sqrt((log d + delta) / (d m))`` with ``delta = log d`` unless given.
    """
    if delta is None:
        delta = math.log(d)
    return 16.0 * alpha * math.sqrt((math.log(d) + delta) / (d * m))


def solve_convex(target: EmpiricalTarget, cfg: SolverConfig) -> ThetaEstimate:
    """Nuclear-norm-regularized completion by proximal gradient (d <= 400).

    Each iteration takes a gradient step on the weighted loss, soft-thresholds
    the singular values by ``step * lambda`` and clips entries to
    ``[-alpha, alpha]``, with step halving whenever the objective would
    increase. Starts from the better of the clipped empirical target and 0,
    so the returned estimate never scores worse than either anchor. Stops on
    relative objective change below 1e-9 or at the step cap (flagged via
    ``converged=False``).
    """
    d = target.d
    if d > 400:
        raise ValueError(f"reference-scale solver supports d <= 400, got d={d}")
    if cfg.rank > d:
        raise ValueError(f"rank {cfg.rank} exceeds d={d}")
    alpha = cfg.alpha_cap
    if alpha is None:
        alpha = float(np.max(np.abs(target.theta_emp)))
    lam = cfg.lambda_reg
    if lam is None:
        lam = default_lambda(alpha, d, target.m)

    def objective(theta: np.ndarray) -> float:
        s = np.linalg.svd(theta, compute_uv=False)
        return loss_weighted(theta, target) + lam * float(s.sum())

    w_max = float(target.weights.w.max())
    base_step = (2.0 * target.m / w_max) if w_max > 0 else 1.0

    clipped = np.clip(target.theta_emp, -alpha, alpha)
    zero = np.zeros_like(clipped)
    theta, obj = min(
        ((clipped, objective(clipped)), (zero, objective(zero))), key=lambda p: p[1]
    )
    trace = [obj]
    converged = False
    for _ in range(cfg.steps):
        grad = loss_gradient(theta, target)
        step = base_step
        cand, cand_obj = theta, obj
        for _halving in range(60):
            u, s, vt = np.linalg.svd(theta - step * grad, full_matrices=False)
            proposal = (u * np.maximum(s - step * lam, 0.0)) @ vt
            np.clip(proposal, -alpha, alpha, out=proposal)
            proposal_obj = objective(proposal)
            if proposal_obj <= obj:
                cand, cand_obj = proposal, proposal_obj
                break
            step /= 2.0
        if cand_obj >= obj - 1e-300 and cand is theta:
            converged = True  # no descent direction left
            break
        rel_change = (obj - cand_obj) / max(abs(obj), 1e-300)
        theta, obj = cand, cand_obj
        trace.append(obj)
        if rel_change < 1e-9:
            converged = True
            break
    return ThetaEstimate(
        theta_hat=theta,
        factors=_factor_estimate(svd_truncated(theta, cfg.rank)),
        loss_trace=np.asarray(trace),
        converged=converged,
    )


def _right_factors(u: np.ndarray, v: np.ndarray) -> FactorEstimate:
    # Right singular vectors of U V^T without forming the m-by-d product:
    # V = Qv Rv, then svd(U Rv^T) = P S W^T gives U V^T = P S (Qv W)^T.
    qv, rv = np.linalg.qr(v)
    _, s, wt = np.linalg.svd(u @ rv.T, full_matrices=False)
    q = qv @ wt.T
    for j in range(q.shape[1]):
        nz = np.flatnonzero(np.abs(q[:, j]) > 1e-12)
        if nz.size and q[nz[0], j] < 0:
            q[:, j] = -q[:, j]
    degenerate = bool(s.size == 0 or s[-1] <= 1e-12 * max(float(s[0]), 1.0))
    return FactorEstimate(q=q, lam=s, degenerate=degenerate)


def _mc_spectral_init(
    vals: np.ndarray, obs: ObservationSet, rank: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    # Top-r SVD of (d/k) * P_E(X), the unbiased dense proxy, via sparse SVD.
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import svds

    m, d, k = obs.m, obs.d, obs.k_per_row
    rows = np.repeat(np.arange(m), k)
    sp = csr_matrix((vals.ravel() * (d / k), (rows, obs.cols.ravel())), shape=(m, d))
    if rank >= min(m, d):  # svds needs strict inequality; fall back to dense
        u, s, vt = np.linalg.svd(sp.toarray(), full_matrices=False)
        u, s, vt = u[:, :rank], s[:rank], vt[:rank]
    else:
        v0 = rng.standard_normal(min(m, d))
        u, s, vt = svds(sp, k=rank, v0=v0)
        order = np.argsort(s)[::-1]
        u, s, vt = u[:, order], s[order], vt[order]
    scale = np.sqrt(np.maximum(s, 0.0))
    return u * scale, vt.T * scale


def baseline_full_completion(
    x_obs, obs: ObservationSet, cfg: SolverConfig, rng: np.random.Generator
) -> FactorEstimate:
    """Vanilla two-factor matrix completion on the observed entries of X.

    Minimizes the mean squared error over observed entries of ``U V^T``
    plus ``lambda ((1/m) sum ||u_i||^2 + (1/d) sum ||v_j||^2)`` by Adam
    (``lambda_reg=None`` defaults to 0.1, the grid-searched value), then
    returns the right factors of ``U V^T``.
    """
    if cfg.rank > min(obs.m, obs.d):
        raise ValueError(f"rank {cfg.rank} exceeds min(m, d)")
    vals = observed_values(x_obs, obs)
    m, d, k = obs.m, obs.d, obs.k_per_row
    lam = 0.1 if cfg.lambda_reg is None else cfg.lambda_reg
    n_obs = m * k
    if cfg.init_mode == "spectral":
        u, v = _mc_spectral_init(vals, obs, cfg.rank, rng)
    else:
        scale = 0.1 / math.sqrt(cfg.rank)
        u = rng.normal(0.0, scale, size=(m, cfg.rank))
        v = rng.normal(0.0, scale, size=(d, cfg.rank))
    adam_u = _Adam(u.shape, cfg)
    adam_v = _Adam(v.shape, cfg)
    flat_cols = obs.cols.ravel()
    for t in range(1, cfg.steps + 1):
        v_at = v[obs.cols]  # (m, k, r)
        res = np.einsum("il,ijl->ij", u, v_at) - vals
        gu = (2.0 / n_obs) * np.einsum("ij,ijl->il", res, v_at) + (2.0 * lam / m) * u
        wv = res[:, :, None] * u[:, None, :]  # (m, k, r)
        gv = np.empty_like(v)
        flat_w = wv.reshape(-1, cfg.rank)
        for l in range(cfg.rank):
            gv[:, l] = np.bincount(flat_cols, weights=flat_w[:, l], minlength=d)
        gv = (2.0 / n_obs) * gv + (2.0 * lam / d) * v
        u = adam_u.step(u, gu)
        v = adam_v.step(v, gv)
        if t % _LOG_EVERY == 0 or t == cfg.steps:
            fit = float(np.sum(res * res)) / n_obs
            if not math.isfinite(fit):
                raise SolverDivergenceError(
                    f"non-finite loss at step {t}; try a smaller learning rate"
                )
    return _right_factors(u, v)


def masked_gram(x_obs, obs: ObservationSet) -> np.ndarray:
    """``P_E(X)^T P_E(X)`` accumulated from the observed values."""
    vals = observed_values(x_obs, obs)
    numer, _ = _accumulate_gram(vals, obs)
    return numer


def baseline_direct(x_obs, obs: ObservationSet, r: int) -> FactorEstimate:
    """Rank-r factorization of the masked Gram matrix ``P_E(X)^T P_E(X)``."""
    if r > obs.d:
        raise ValueError(f"rank {r} exceeds d={obs.d}")
    return _factor_estimate(svd_truncated(masked_gram(x_obs, obs), r))


def save_factors(fe: FactorEstimate, prefix) -> None:
    """Serialize a factor estimate as ``<prefix>.q.mat`` and ``<prefix>.lambda.mat``."""
    from .datagen import save_matrix

    save_matrix(fe.q, f"{prefix}.q.mat")
    save_matrix(fe.lam.reshape(1, -1), f"{prefix}.lambda.mat")


def load_factors(prefix) -> FactorEstimate:
    """Read back a factor estimate written by :func:`save_factors`."""
    from .datagen import load_matrix

    q = load_matrix(f"{prefix}.q.mat")
    lam = load_matrix(f"{prefix}.lambda.mat").ravel()
    degenerate = bool(lam.size == 0 or lam[-1] <= 1e-12 * max(float(lam[0]), 1.0))
    return FactorEstimate(q=q, lam=lam, degenerate=degenerate)


def save_theta_estimate(est: ThetaEstimate, prefix) -> None:
    """Serialize ``<prefix>.theta.mat`` plus the factor files."""
    from .datagen import save_matrix

    save_matrix(est.theta_hat, f"{prefix}.theta.mat")
    save_factors(est.factors, prefix)


def baseline_no_diagonal(x_obs, obs: ObservationSet, r: int) -> FactorEstimate:
    """Rank-r factorization of the masked Gram matrix with its diagonal zeroed.

    The diagonal of the masked Gram is biased upward (it averages squares,
    not cross products), so dropping it can only help the subspace estimate.
    A zero matrix after hollowing (e.g. identity input) yields factors
    flagged as degenerate.
    """
    if r > obs.d:
        raise ValueError(f"rank {r} exceeds d={obs.d}")
    gram = masked_gram(x_obs, obs)
    np.fill_diagonal(gram, 0.0)
    return _factor_estimate(svd_truncated(gram, r))
