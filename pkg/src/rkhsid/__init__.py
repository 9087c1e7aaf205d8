"""Adaptive kernel-based estimation of an unknown ODE nonlinearity.

The package couples a state observer with a gradient learning law for
the coefficients of a kernel expansion, traces the plant's invariant
level curve, and verifies empirically that the learned function
converges along that curve at the rates the kernel smoothness dictates.
"""

from .kernels import KernelSpec, RateParameters, eval_kernel, gram_matrix, kernel_vector, sup_kernel_bound
from .rkhs import CenterSet, GramFactorization, RkhsFunction, evaluate, factorize, interpolate, native_norm, project
from .dynamics import (
    EstimatorTrajectory,
    LyapunovSolution,
    SystemConfig,
    estimator_rhs,
    example_config,
    first_integral,
    level_seed,
    plant_rhs,
    simulate,
    solve_lyapunov,
)
from .manifold import ManifoldPolyline, fill_distance, intrinsic_distance, trace_level_set, trajectory_samples, uniform_samples
from .analysis import (
    ConvergenceReport,
    ErrorRecord,
    convergence_study,
    discrete_sobolev_error,
    error_field,
    fit_slope,
    reference_estimate,
    sup_error,
)
from .config import RunConfig, default_config_yaml, load_config

__version__ = "0.1.0"
