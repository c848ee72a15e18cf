"""Figure generation for one-sided matrix completion experiment outputs."""

from .plotting import (
    KINDS,
    MissingColumnError,
    PlotJob,
    embed_factors,
    load_matrix_file,
    plot_curves,
    plot_factor_scatter,
    plot_rankdep,
    render,
)

__all__ = [
    "KINDS",
    "MissingColumnError",
    "PlotJob",
    "embed_factors",
    "load_matrix_file",
    "plot_curves",
    "plot_factor_scatter",
    "plot_rankdep",
    "render",
]
__version__ = "0.1.0"
