"""Robust compressed sensing with Lorentzian iterative hard thresholding.

Sparse recovery from measurements corrupted by heavy-tailed, impulsive
noise: the LL2 (Lorentzian) residual metric makes the thresholded
gradient-projection solvers insensitive to gross outliers while keeping
the per-iteration cost of plain least-squares IHT.
"""

from .analysis import (BoundReport, RipEstimate, compressible_bound,
                       exact_recovery, objective_violations, oracle_recover,
                       rip_constant, rsnr, theorem_bound)
from .backend import BACKEND, HAVE_COMPILED, fwht
from .lorentzian import (LorentzianScale, estimate_gamma,
                         gamma_from_clean_range, ll2_norm, negative_gradient,
                         quantile, weights)
from .noise import NoiseSpec, corrupt, sample
from .operators import (DenseOperator, MeasurementSet, PartialHadamardOperator,
                        RestrictedColumnsOperator, SensingOperator,
                        from_descriptor, gaussian_ensemble, partial_hadamard,
                        spectral_norm_estimate)
from .solvers import (DivergenceError, SolverError, SolveReport, SolverParams,
                      StepStallError, adaptive_step, clip_measurements,
                      ls_iht, liht, liht_pks, line_search_guard,
                      model_liht, reject_measurements)
from .thresholding import (BlockSparsityModel, SparsityModel, hard_threshold,
                           hard_threshold_pks, project_model,
                           top_magnitude_indices)
from .util import as_support, derive_seed, embed

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BlockSparsityModel", "BoundReport", "DenseOperator",
    "DivergenceError", "HAVE_COMPILED", "LorentzianScale", "MeasurementSet",
    "NoiseSpec", "PartialHadamardOperator", "RestrictedColumnsOperator",
    "RipEstimate", "SensingOperator", "SolveReport", "SolverError",
    "SolverParams", "SparsityModel", "StepStallError", "adaptive_step",
    "as_support", "clip_measurements", "compressible_bound", "corrupt",
    "derive_seed", "embed", "estimate_gamma", "exact_recovery",
    "from_descriptor", "fwht", "gamma_from_clean_range", "gaussian_ensemble",
    "hard_threshold", "hard_threshold_pks", "liht", "liht_pks",
    "line_search_guard", "ll2_norm", "ls_iht", "model_liht",
    "negative_gradient", "objective_violations", "oracle_recover",
    "partial_hadamard", "project_model", "quantile", "reject_measurements",
    "rip_constant", "rsnr", "sample", "spectral_norm_estimate",
    "theorem_bound", "top_magnitude_indices", "weights",
]
