"""Weighted lp regression by IRLS, with majorize-minimize diagnostics and NLPR denoising."""

from .exceptions import (
    DegenerateDenominatorError,
    DimensionMismatchError,
    InsufficientDataError,
    InvariantViolationError,
)
from .lpcore import (
    AnchorSet,
    LpParams,
    cost,
    gradient,
    hessian,
    regularized_norm_sq,
    smallest_hessian_eigenvalue,
)
from .irls import GeometricSchedule, IrlsConfig, SolverTrace, Termination, irls_step, irls_weights, nlm_init, solve
from .surrogate import (
    RateDiagnostics,
    SurrogateAt,
    build_surrogate,
    fit_linear_rate,
    nu_bound,
    reference_minimizer,
    scalar_majorization_gap,
    surrogate_minimizer,
    surrogate_value,
    theta_t,
)
from .baselines import BaselineConfig, gradient_descent_solve, newton_solve
from .nlpr import NlprConfig, PatchConfig, add_gaussian_noise, mse, nlm_denoise, nlpr_denoise, psnr

__version__ = "0.1.0"
