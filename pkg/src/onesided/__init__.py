"""One-sided matrix completion.

Estimate the column-similarity matrix ``theta* = (1/m) X^T X`` of a tall
m-by-d matrix X observed at only k >= 2 random entries per row, and recover
its top-r eigenvectors (the right singular vectors / column factors of X)
even when completing X itself is impossible.
"""

from .datagen import (
    GroundTruth,
    MatrixFormatError,
    gen_correlated,
    gen_gaussian,
    gen_special,
    load_matrix,
    load_observations,
    power_law_spectrum,
    save_matrix,
    save_observations,
)
from .estimators import (
    EmpiricalTarget,
    FactorEstimate,
    SolverConfig,
    SolverDivergenceError,
    ThetaEstimate,
    baseline_direct,
    baseline_full_completion,
    baseline_no_diagonal,
    empirical_target,
    load_factors,
    loss_gradient,
    loss_rowform,
    loss_weighted,
    save_factors,
    save_theta_estimate,
    solve_convex,
    solve_factored,
)
from .harness import (
    ExperimentRecord,
    RankDepSpec,
    SweepSpec,
    rank_dependence,
    run_sweep,
    write_records,
)
from .masking import (
    CooccurrenceWeights,
    ObservationSet,
    apply_mask,
    cooccurrence,
    observed_values,
    sample_mask,
)
from .matcore import (
    MatrixNorms,
    SvdConvergenceError,
    SvdResult,
    make_rng,
    norms,
    procrustes_align,
    svd_truncated,
)
from .metrics import (
    EvalReport,
    eval_colfactors,
    eval_rowspace,
    eval_theta,
    incoherence,
    theory_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
