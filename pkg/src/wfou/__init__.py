"""Simulation and least-squares drift estimation for the weighted fractional
Ornstein-Uhlenbeck process."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, ConvergenceError, DegenerateDenominator, DomainError,
    FactorizationFailed, NumericError, ParameterError,
)
from .wfbm import (  # noqa: E402
    PathSample, TimeGrid, WfbmParams, build_sampler, covariance, covariance_matrix,
    m_integral, sample_paths, validate_params,
)
from .ou import OuModel, ou_path, scheme_gap  # noqa: E402
from .estimators import (  # noqa: E402
    EstimateReport, estimate, lse_continuous, lse_discrete_check, lse_discrete_hat,
)

__all__ = [
    "ConfigError", "ConvergenceError", "DegenerateDenominator", "DomainError",
    "FactorizationFailed", "NumericError", "ParameterError",
    "PathSample", "TimeGrid", "WfbmParams", "build_sampler", "covariance",
    "covariance_matrix", "m_integral", "sample_paths", "validate_params",
    "OuModel", "ou_path", "scheme_gap",
    "EstimateReport", "estimate", "lse_continuous", "lse_discrete_check", "lse_discrete_hat",
]
