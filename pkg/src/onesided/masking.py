"""Per-row observation patterns and their co-occurrence weights.

Each row of the data matrix is observed at exactly ``k`` distinct columns,
drawn uniformly over k-subsets of ``[0, d)`` independently across rows.
Observations are stored per row (an (m, k) index array), never as a dense
mask, so millions of rows fit in memory; the dense 0/1 mask is materialized
only on demand by :func:`apply_mask`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import as_matrix

# rows per chunk are sized so scratch arrays stay near ~64 MB
_CHUNK_BUDGET = 8_000_000


class ObservationFormatError(ValueError):
    """Malformed observation-set text file."""


@dataclass(frozen=True)
class ObservationSet:
    """Observed column indices, one sorted row of ``k`` distinct indices each."""

    m: int
    d: int
    k_per_row: int
    cols: np.ndarray  # (m, k) int64, each row sorted, entries in [0, d)

    def __post_init__(self):
        if self.cols.shape != (self.m, self.k_per_row):
            raise ValueError("cols shape does not match (m, k_per_row)")


@dataclass(frozen=True)
class CooccurrenceWeights:
    """Symmetric d-by-d counts: w[j1, j2] = #rows observing both columns."""

    w: np.ndarray  # (d, d) float64, nonnegative integers stored as reals


def sample_mask(m: int, d: int, k: int, rng: np.random.Generator) -> ObservationSet:
    """Sample ``k`` observed columns per row, uniform over k-subsets of [0, d).

    Rows are independent. Deterministic given the generator state. Rejects
    ``k < 2`` (a single observation per row carries no pairwise information)
    and ``k > d``.
    """
    if not 2 <= k <= d:
        raise ValueError(f"k={k} must satisfy 2 <= k <= d={d}")
    if m < 1:
        raise ValueError("m must be positive")
    if k == d:
        cols = np.tile(np.arange(d, dtype=np.int64), (m, 1))
    elif k == 2:
        # Uniform ordered pair (a, b), b != a, then sort: uniform 2-subset.
        a = rng.integers(0, d, size=m)
        b = rng.integers(0, d - 1, size=m)
        b += b >= a
        cols = np.sort(np.stack([a, b], axis=1), axis=1)
    else:
        # k smallest of d i.i.d. uniform keys per row: uniform k-subset.
        cols = np.empty((m, k), dtype=np.int64)
        chunk = max(1, _CHUNK_BUDGET // d)
        for lo in range(0, m, chunk):
            hi = min(lo + chunk, m)
            keys = rng.random((hi - lo, d))
            part = np.argpartition(keys, k - 1, axis=1)[:, :k]
            cols[lo:hi] = np.sort(part, axis=1)
    return ObservationSet(m=m, d=d, k_per_row=k, cols=cols)


def _pair_indices(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # All k^2 ordered index pairs per row, diagonal included once per column.
    k = cols.shape[1]
    j1 = np.repeat(cols, k, axis=1).ravel()
    j2 = np.tile(cols, (1, k)).ravel()
    return j1, j2


def cooccurrence(obs: ObservationSet) -> CooccurrenceWeights:
    """Co-occurrence counts of the observation pattern (the Gram of the 0/1 mask).

    ``w[j, j]`` counts rows observing column j; ``w[j1, j2]`` counts rows
    observing both. Diagonal sums to ``m * k``, off-diagonal to ``m * k * (k-1)``.
    """
    d = obs.d
    w = np.zeros(d * d, dtype=np.float64)
    chunk = max(1, _CHUNK_BUDGET // (obs.k_per_row**2))
    for lo in range(0, obs.m, chunk):
        j1, j2 = _pair_indices(obs.cols[lo : lo + chunk])
        w += np.bincount(j1 * d + j2, minlength=d * d)
    return CooccurrenceWeights(w=w.reshape(d, d))


def apply_mask(x, obs: ObservationSet) -> np.ndarray:
    """Zero out all entries of ``x`` outside the observation pattern."""
    x = as_matrix(x, "x")
    if x.shape != (obs.m, obs.d):
        raise ValueError(f"shape mismatch: x is {x.shape}, mask is ({obs.m}, {obs.d})")
    out = np.zeros_like(x)
    np.put_along_axis(out, obs.cols, np.take_along_axis(x, obs.cols, axis=1), axis=1)
    return out


def observed_values(x_obs, obs: ObservationSet) -> np.ndarray:
    """Return the (m, k) array of values at the observed positions.

    ``x_obs`` may be the full (m, d) matrix (entries outside the pattern are
    ignored) or an (m, k) array already aligned with ``obs.cols``.
    """
    x_obs = np.asarray(x_obs, dtype=np.float64)
    if x_obs.shape == (obs.m, obs.d):
        return np.take_along_axis(x_obs, obs.cols, axis=1)
    if x_obs.shape == (obs.m, obs.k_per_row):
        return x_obs
    raise ValueError(
        f"x_obs shape {x_obs.shape} matches neither ({obs.m}, {obs.d}) "
        f"nor ({obs.m}, {obs.k_per_row})"
    )


def save_observation_set(obs: ObservationSet, path) -> None:
    """Write the index-only text format: header ``m d k``, one row per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{obs.m} {obs.d} {obs.k_per_row}\n")
        for row in obs.cols:
            fh.write(" ".join(str(int(j)) for j in row) + "\n")


def load_observation_set(path) -> ObservationSet:
    """Read the format written by :func:`save_observation_set`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        try:
            m, d, k = (int(tok) for tok in header.split())
        except ValueError as exc:
            raise ObservationFormatError(f"{path}:1: malformed header {header!r}") from exc
        cols = np.empty((m, k), dtype=np.int64)
        for i in range(m):
            line = fh.readline()
            lineno = i + 2
            toks = line.split()
            if len(toks) != k:
                raise ObservationFormatError(
                    f"{path}:{lineno}: expected {k} indices, got {len(toks)}"
                )
            try:
                row = np.array([int(t) for t in toks], dtype=np.int64)
            except ValueError as exc:
                raise ObservationFormatError(
                    f"{path}:{lineno}: non-integer token"
                ) from exc
            if row.min() < 0 or row.max() >= d:
                raise ObservationFormatError(
                    f"{path}:{lineno}: column index out of range [0, {d})"
                )
            if np.unique(row).size != k:
                raise ObservationFormatError(f"{path}:{lineno}: duplicate column index")
            cols[i] = np.sort(row)
    return ObservationSet(m=m, d=d, k_per_row=k, cols=cols)
