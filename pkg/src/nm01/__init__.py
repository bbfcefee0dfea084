"""Newton method for ``min f(x) + lam * ||(Ax + b)_+||_0``.

Submodules: :mod:`~nm01.core` (prox, index sets, stationarity),
:mod:`~nm01.linsys` (Newton saddle systems), :mod:`~nm01.objectives`,
:mod:`~nm01.solver`, :mod:`~nm01.svm`, :mod:`~nm01.onebit`,
:mod:`~nm01.data_io` and the ``nm01`` command line in :mod:`~nm01.cli`.
"""
from .core import (
    IndexPartition,
    PrimalDualPoint,
    ProblemInstance,
    StationarityResidual,
    ZeroSolutionWarning,
    p_stationarity_check,
    partition_indices,
    prox_scalar,
    prox_vector,
    residual_F,
    subdiff_membership,
    tau_bounds,
    zero_one_objective,
)
from .linsys import BlockDiagonal, Dense, Diagonal, SingularSystemError, solve_saddle, spectral_norm_estimate
from .objectives import QuadraticDiag, SmoothedLq, finite_diff_check, quadratic_diag_model, smoothed_lq_model
from .solver import SolveOptions, SolveReport, Status, global_opt_certificate, solve

__version__ = "0.1.0"

__all__ = [
    "IndexPartition",
    "PrimalDualPoint",
    "ProblemInstance",
    "StationarityResidual",
    "ZeroSolutionWarning",
    "p_stationarity_check",
    "partition_indices",
    "prox_scalar",
    "prox_vector",
    "residual_F",
    "subdiff_membership",
    "tau_bounds",
    "zero_one_objective",
    "BlockDiagonal",
    "Dense",
    "Diagonal",
    "SingularSystemError",
    "solve_saddle",
    "spectral_norm_estimate",
    "QuadraticDiag",
    "SmoothedLq",
    "finite_diff_check",
    "quadratic_diag_model",
    "smoothed_lq_model",
    "SolveOptions",
    "SolveReport",
    "Status",
    "global_opt_certificate",
    "solve",
]
