"""Synthetic ground-truth generation and text-format persistence.

Generators produce a :class:`GroundTruth` holding the factor pair (u, v),
the target similarity matrix ``theta* = (1/m) x^T x`` (computed from the
factors, never from a materialized x) and its top-r eigenpairs. The full
x is exposed as a lazy property since it can be enormous.

Two text formats are shared with the plotting component:

* dense matrix: line 1 ``rows cols``, then one row per line of
  space-separated decimals with 17 significant digits (bit-exact round trip);
* observations: header ``m d k``, then ``m * k`` lines of ``row col value``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masking import ObservationSet, observed_values
from .matcore import as_matrix, svd_truncated


class MatrixFormatError(ValueError):
    """Malformed matrix or observation text file; message carries the line."""


@dataclass(frozen=True)
class GroundTruth:
    """Exact factors and spectral data of a synthetic instance."""

    u: np.ndarray  # (m, r)
    v: np.ndarray  # (d, r)
    theta_star: np.ndarray  # (d, d) symmetric PSD
    q_true: np.ndarray  # (d, r) top-r eigenvectors
    lambda_true: np.ndarray  # (r,) top-r eigenvalues, nonincreasing

    @property
    def x(self) -> np.ndarray:
        """The full m-by-d matrix ``u @ v.T`` (materialized on demand)."""
        return self.u @ self.v.T

    def observed_values(self, obs: ObservationSet) -> np.ndarray:
        """Values of x at the observed positions, (m, k), without forming x."""
        vals = np.empty(obs.cols.shape)
        chunk = max(1, 4_000_000 // max(self.r, 1))
        for lo in range(0, obs.m, chunk):
            hi = min(lo + chunk, obs.m)
            vals[lo:hi] = np.einsum("il,ijl->ij", self.u[lo:hi], self.v[obs.cols[lo:hi]])
        return vals

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> int:
        return self.v.shape[0]

    @property
    def r(self) -> int:
        return self.u.shape[1]


def _from_factors(u: np.ndarray, v: np.ndarray) -> GroundTruth:
    m = u.shape[0]
    theta = v @ ((u.T @ u) / m) @ v.T
    theta = (theta + theta.T) / 2.0
    res = svd_truncated(theta, u.shape[1])
    return GroundTruth(u=u, v=v, theta_star=theta, q_true=res.v, lambda_true=res.s)


def gen_gaussian(m: int, d: int, r: int, rng: np.random.Generator) -> GroundTruth:
    """Independent Gaussian factors scaled so each entry of x has unit variance.

    Factor entries are N(0, r^{-1/2}) where r^{-1/2} is the *variance* (std
    r^{-1/4}); summing r independent products then gives Var(x_ij) = 1.
    """
    if not 1 <= r <= min(m, d):
        raise ValueError(f"rank r={r} outside [1, min(m, d)]")
    std = r ** (-0.25)
    u = rng.normal(0.0, std, size=(m, r))
    v = rng.normal(0.0, std, size=(d, r))
    return _from_factors(u, v)


def gen_correlated(
    m: int, d: int, r: int, spectrum, rng: np.random.Generator
) -> GroundTruth:
    """Correlated factors: ``x = z1 @ diag(sqrt(spectrum)) @ z2.T``.

    ``spectrum`` lists the eigenvalues of the squared coupling matrix; a flat
    spectrum reproduces independent standard-Gaussian factors (up to the
    variance convention of :func:`gen_gaussian`).
    """
    spectrum = np.asarray(spectrum, dtype=np.float64).ravel()
    if spectrum.size != r:
        raise ValueError(f"spectrum must have length r={r}")
    if np.any(spectrum < 0):
        raise ValueError("spectrum must be nonnegative")
    if not 1 <= r <= min(m, d):
        raise ValueError(f"rank r={r} outside [1, min(m, d)]")
    # Split the coupling C = diag(spectrum^{1/2}) symmetrically across the two
    # factors; z1 C z2^T has the same distribution either way.
    c = spectrum**0.25
    u = rng.standard_normal((m, r)) * c
    v = rng.standard_normal((d, r)) * c
    return _from_factors(u, v)


def power_law_spectrum(r: int, exponent: float, c0: float = 1.0) -> np.ndarray:
    """Power-law eigenvalues ``c0 * i^{-exponent}`` for i = 1..r."""
    return c0 * np.arange(1, r + 1, dtype=np.float64) ** (-exponent)


def gen_special(kind: str, m: int, d: int) -> GroundTruth:
    """The deterministic worked examples: ``all_ones`` and ``single_zero``.

    ``all_ones`` is the rank-1 matrix of ones (all incoherence constants
    exactly 1); ``single_zero`` is all ones except a 0 at entry (0, 0), the
    rank-2 case whose rowspace is impossible to pin down from samples.
    """
    if m < 2 or d < 2:
        raise ValueError("m and d must be at least 2")
    if kind == "all_ones":
        u = np.ones((m, 1))
        v = np.ones((d, 1))
    elif kind == "single_zero":
        # ones(m, d) minus the (0, 0) unit matrix, written as two rank-1 terms
        u = np.ones((m, 2))
        u[1:, 1] = 0.0
        v = np.ones((d, 2))
        v[1:, 1] = 0.0
        v[0, 1] = -1.0
    else:
        raise ValueError(f"unknown special kind {kind!r}")
    return _from_factors(u, v)


def save_matrix(a, path) -> None:
    """Write the dense matrix text format (17 significant digits)."""
    a = as_matrix(a)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")


def load_matrix(path) -> np.ndarray:
    """Read the format written by :func:`save_matrix`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        try:
            rows, cols = (int(tok) for tok in header.split())
        except ValueError as exc:
            raise MatrixFormatError(f"{path}:1: malformed header {header!r}") from exc
        if rows < 0 or cols < 0:
            raise MatrixFormatError(f"{path}:1: negative dimensions")
        out = np.empty((rows, cols))
        for i in range(rows):
            line = fh.readline()
            lineno = i + 2
            toks = line.split()
            if len(toks) != cols:
                raise MatrixFormatError(
                    f"{path}:{lineno}: expected {cols} values, got {len(toks)}"
                )
            try:
                out[i] = [float(t) for t in toks]
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: non-numeric token") from exc
        if not np.all(np.isfinite(out)):
            raise MatrixFormatError(f"{path}: non-finite values")
    return out


def save_observations(x_obs, obs: ObservationSet, path) -> None:
    """Write observed entries as ``row col value`` triplets under an ``m d k`` header."""
    vals = observed_values(x_obs, obs)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{obs.m} {obs.d} {obs.k_per_row}\n")
        for i in range(obs.m):
            for j, val in zip(obs.cols[i], vals[i]):
                fh.write(f"{i} {j} {format(val, '.17g')}\n")


def load_observations(path) -> tuple[np.ndarray, ObservationSet]:
    """Read a triplet file; returns the zero-filled dense matrix and the pattern.

    Duplicate (row, col) pairs, out-of-range indices, rows with other than k
    entries and non-numeric tokens are all errors reported with their line
    number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        try:
            m, d, k = (int(tok) for tok in header.split())
        except ValueError as exc:
            raise MatrixFormatError(f"{path}:1: malformed header {header!r}") from exc
        if m < 1 or d < 1 or not 2 <= k <= d:
            raise MatrixFormatError(f"{path}:1: invalid dimensions m={m} d={d} k={k}")
        x = np.zeros((m, d))
        seen: list[list[int]] = [[] for _ in range(m)]
        for lineno, line in enumerate(fh, start=2):
            toks = line.split()
            if not toks:
                continue
            if len(toks) != 3:
                raise MatrixFormatError(
                    f"{path}:{lineno}: expected 'row col value', got {len(toks)} tokens"
                )
            try:
                i, j = int(toks[0]), int(toks[1])
                val = float(toks[2])
            except ValueError as exc:
                raise MatrixFormatError(f"{path}:{lineno}: non-numeric token") from exc
            if not 0 <= i < m:
                raise MatrixFormatError(f"{path}:{lineno}: row index {i} out of range")
            if not 0 <= j < d:
                raise MatrixFormatError(f"{path}:{lineno}: column index {j} out of range")
            if j in seen[i]:
                raise MatrixFormatError(f"{path}:{lineno}: duplicate entry ({i}, {j})")
            seen[i].append(j)
            x[i, j] = val
        cols = np.empty((m, k), dtype=np.int64)
        for i, js in enumerate(seen):
            if len(js) != k:
                raise MatrixFormatError(
                    f"{path}: row {i} has {len(js)} observations, expected {k}"
                )
            cols[i] = np.sort(js)
    return x, ObservationSet(m=m, d=d, k_per_row=k, cols=cols)
