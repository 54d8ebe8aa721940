"""Forecast-error model, exact risk, piecewise-linear cuts, Monte Carlo."""

from .error_model import ErrorModel, TruncatedGaussian, sigma_profile
from .montecarlo import MonteCarloRisk, monte_carlo_risk
from .pla import DEFAULT_ALPHAS, DEFAULT_Z, PlaCoefficients, PlaConfig, build_pla, risk_pla
from .quadrature import QuadratureConfig, RiskValue, adaptive_simpson, risk_exact

__all__ = [
    "ErrorModel", "TruncatedGaussian", "sigma_profile",
    "RiskValue", "QuadratureConfig", "adaptive_simpson", "risk_exact",
    "PlaConfig", "PlaCoefficients", "build_pla", "risk_pla",
    "DEFAULT_ALPHAS", "DEFAULT_Z",
    "MonteCarloRisk", "monte_carlo_risk",
]
