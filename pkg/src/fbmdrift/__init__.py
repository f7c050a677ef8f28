"""Maximum likelihood drift estimation for SDEs driven by small fractional Brownian motion."""

from .asymptotics import FisherMatrix, constants, gamma_matrix, y_empirical, y_limit
from .errors import ConfigError, NumericalError
from .estimator import EstimationResult, OptimizerOptions, maximize_likelihood
from .fbm import fbm_covariance, simulate_fbm, simulate_fbm_cholesky, simulate_fbm_circulant
from .grid import SampledPath, TimeGrid, make_grid
from .likelihood import (
    LikelihoodContext,
    compute_q,
    compute_z,
    dh_const,
    grad_log_likelihood,
    log_likelihood,
    make_context,
)
from .model import DriftModel, ParameterBox, SdeConfig, builtin_model, simulate_sde, solve_ode_limit

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DriftModel",
    "EstimationResult",
    "FisherMatrix",
    "LikelihoodContext",
    "NumericalError",
    "OptimizerOptions",
    "ParameterBox",
    "SampledPath",
    "SdeConfig",
    "TimeGrid",
    "builtin_model",
    "compute_q",
    "compute_z",
    "constants",
    "dh_const",
    "fbm_covariance",
    "gamma_matrix",
    "grad_log_likelihood",
    "log_likelihood",
    "make_context",
    "make_grid",
    "maximize_likelihood",
    "simulate_fbm",
    "simulate_fbm_cholesky",
    "simulate_fbm_circulant",
    "simulate_sde",
    "solve_ode_limit",
    "y_empirical",
    "y_limit",
]
