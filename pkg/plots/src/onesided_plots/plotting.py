"""Figure generation from experiment CSVs and saved factor files.

Three figure kinds mirror the experiment pipeline's outputs:

* ``curve_m`` / ``curve_k`` -- recovery-error curves from a sweep CSV, one
  line per algorithm with a +-2 sigma band across mask repeats;
* ``rankdep`` -- log-log scatter of (rank, required rows) with the fitted
  slope annotated;
* ``factor_scatter`` -- 2-d embedding of the recovered column factors
  (rows of q * sqrt(lambda)), colored by an optional label file.

The input formats (sweep CSV schema, rank-dependence CSV, dense-matrix
text files) are the experiment harness's public interfaces; this package
reads the files directly and never imports the estimation code. Every plot
function returns the plotted data so callers can verify it, and rendering
is deterministic for fixed inputs and seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

KINDS = ("curve_m", "curve_k", "rankdep", "factor_scatter")


class MissingColumnError(ValueError):
    """The input CSV lacks a column the plot kind requires."""


@dataclass(frozen=True)
class PlotJob:
    input: str
    kind: str
    output: str
    group_by: str = "algorithm"
    labels: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown plot kind {self.kind!r}; choose from {KINDS}")


def load_matrix_file(path) -> np.ndarray:
    """Reader for the dense-matrix text format: 'rows cols' header, one row per line."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        rows, cols = int(header[0]), int(header[1])
        out = np.empty((rows, cols))
        for i in range(rows):
            out[i] = [float(tok) for tok in fh.readline().split()]
    return out


def _require_columns(frame: pd.DataFrame, needed, path) -> None:
    for column in needed:
        if column not in frame.columns:
            raise MissingColumnError(f"{path}: missing required column {column!r}")


def _band(values: np.ndarray) -> tuple[float, float, float]:
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return mean, mean - 2.0 * std, mean + 2.0 * std


def plot_curves(job: PlotJob) -> dict:
    """Error-vs-m or error-vs-k curves with mean +- 2 sigma bands per group.

    Failed records (empty metric cells) are dropped. Returns the plotted
    series: ``{group: {"x": ..., "mean": ..., "lo": ..., "hi": ...}}``.
    """
    x_col = "m" if job.kind == "curve_m" else "k"
    frame = pd.read_csv(job.input)
    _require_columns(frame, [x_col, "rowspace_err", job.group_by], job.input)
    frame = frame.dropna(subset=["rowspace_err"])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series: dict[str, dict[str, np.ndarray]] = {}
    for group, rows in frame.groupby(job.group_by, sort=True):
        xs = np.array(sorted(rows[x_col].unique()))
        stats = [
            _band(rows.loc[rows[x_col] == x, "rowspace_err"].to_numpy()) for x in xs
        ]
        mean = np.array([s[0] for s in stats])
        lo = np.array([s[1] for s in stats])
        hi = np.array([s[2] for s in stats])
        series[str(group)] = {"x": xs, "mean": mean, "lo": lo, "hi": hi}
        (line,) = ax.plot(xs, mean, marker="o", label=str(group))
        if len(xs) > 0 and np.any(hi > lo):
            ax.fill_between(xs, lo, hi, alpha=0.2, color=line.get_color())
    if job.kind == "curve_m":
        ax.set_xscale("log")
    ax.set_xlabel("rows m" if job.kind == "curve_m" else "observations per row k")
    ax.set_ylabel("rowspace error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(job.output, dpi=120)
    plt.close(fig)
    return series


def plot_rankdep(job: PlotJob) -> float:
    """Log-log scatter of required rows against rank with the fitted slope.

    Returns the least-squares slope, which is also annotated on the figure.
    """
    frame = pd.read_csv(job.input)
    _require_columns(frame, ["r", "m_star"], job.input)
    if len(frame) < 2:
        raise ValueError(f"{job.input}: need at least two ranks to fit a slope")
    log_r = np.log(frame["r"].to_numpy(dtype=float))
    log_m = np.log(frame["m_star"].to_numpy(dtype=float))
    slope, intercept = np.polyfit(log_r, log_m, 1)

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.scatter(log_r, log_m, zorder=3)
    grid = np.linspace(log_r.min(), log_r.max(), 50)
    ax.plot(grid, slope * grid + intercept, linestyle="--")
    ax.annotate(
        f"slope = {slope:.2f}",
        xy=(0.05, 0.92),
        xycoords="axes fraction",
        fontsize=11,
    )
    ax.set_xlabel("log r")
    ax.set_ylabel("log m*")
    fig.tight_layout()
    fig.savefig(job.output, dpi=120)
    plt.close(fig)
    return float(slope)


def embed_factors(points: np.ndarray, seed: int = 0) -> np.ndarray:
    """2-d embedding of factor rows: seeded t-SNE, or PCA below 50 points.

    Zero-variance input (all factors identical) skips the embedding with a
    warning and returns coincident points.
    """
    n = points.shape[0]
    centered = points - points.mean(axis=0)
    if not np.any(centered):
        warnings.warn("all factors identical; embedding is degenerate")
        return np.zeros((n, 2))
    if n < 50:
        u, s, _ = np.linalg.svd(centered, full_matrices=False)
        out = np.zeros((n, 2))
        take = min(2, u.shape[1])
        out[:, :take] = u[:, :take] * s[:take]
        return out
    from sklearn.manifold import TSNE

    tsne = TSNE(
        n_components=2,
        perplexity=min(30.0, n / 4.0),
        random_state=seed,
        init="pca",
    )
    return np.asarray(tsne.fit_transform(points), dtype=np.float64)


def plot_factor_scatter(job: PlotJob) -> np.ndarray:
    """Scatter the recovered column factors in 2-d.

    ``job.input`` is the factor-file prefix: ``<prefix>.q.mat`` (d x r) and
    ``<prefix>.lambda.mat`` (1 x r) as written by the estimation pipeline.
    The embedded rows of ``q * sqrt(lambda)`` are returned. An optional
    label file (one label per line, d lines) colors the points.
    """
    q = load_matrix_file(f"{job.input}.q.mat")
    lam = load_matrix_file(f"{job.input}.lambda.mat").ravel()
    points = q * np.sqrt(np.maximum(lam, 0.0))
    embedding = embed_factors(points, seed=job.seed)

    labels = None
    if job.labels is not None:
        with open(job.labels, "r", encoding="utf-8") as fh:
            labels = [line.strip() for line in fh if line.strip()]
        if len(labels) != q.shape[0]:
            raise ValueError(
                f"{job.labels}: {len(labels)} labels for {q.shape[0]} factors"
            )

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    if labels is None:
        ax.scatter(embedding[:, 0], embedding[:, 1], s=18)
    else:
        for name in sorted(set(labels)):
            rows = np.array([lab == name for lab in labels])
            ax.scatter(embedding[rows, 0], embedding[rows, 1], s=18, label=name)
        ax.legend()
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    fig.tight_layout()
    fig.savefig(job.output, dpi=120)
    plt.close(fig)
    return embedding


def render(job: PlotJob):
    """Dispatch on ``job.kind``; returns that kind's plotted data."""
    if job.kind in ("curve_m", "curve_k"):
        return plot_curves(job)
    if job.kind == "rankdep":
        return plot_rankdep(job)
    return plot_factor_scatter(job)
