"""Forecast-error distribution: zero-mean Gaussian, truncated to the
physical output range and renormalized.

A farm that forecasts ``w_hat`` with installed capacity ``w_max`` can err
only within ``[-w_hat, w_max - w_hat]``; the per-cell standard deviation
grows toward the end of the horizon (forecasts made day-ahead degrade for
later periods).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr  # standard normal CDF, vectorized

from ..errors import DimensionMismatchError, MalformedProblemError

_SQRT2PI = math.sqrt(2.0 * math.pi)


def sigma_profile(scale: float, forecast: np.ndarray) -> np.ndarray:
    """Per-cell standard deviation: ``scale * w_hat * (1 + exp(-(T - t)))``
    with periods t = 1..T, so the final period carries twice the base level.
    """
    if scale < 0:
        raise MalformedProblemError("sigma scale must be nonnegative")
    forecast = np.asarray(forecast, dtype=float)
    t_count = forecast.shape[-1]
    t = np.arange(1, t_count + 1, dtype=float)
    return scale * forecast * (1.0 + np.exp(-(t_count - t)))


@dataclass(frozen=True)
class TruncatedGaussian:
    """Zero-mean Gaussian with scale ``sigma`` truncated to ``[lo, hi]``."""

    sigma: float
    lo: float
    hi: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise MalformedProblemError("TruncatedGaussian needs sigma > 0")
        if not self.lo < self.hi:
            raise MalformedProblemError("empty truncation interval")

    @property
    def _mass(self) -> float:
        return float(ndtr(self.hi / self.sigma) - ndtr(self.lo / self.sigma))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        z = x / self.sigma
        raw = np.exp(-0.5 * z * z) / (self.sigma * _SQRT2PI)
        return np.where(inside, raw / self._mass, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo_c = ndtr(self.lo / self.sigma)
        val = (ndtr(np.clip(x, self.lo, self.hi) / self.sigma) - lo_c) / self._mass
        return np.clip(np.where(x < self.lo, 0.0, np.where(x > self.hi, 1.0, val)), 0.0, 1.0)

    def ppf(self, q: float, tol: float = 1e-10) -> float:
        """Inverse CDF by bisection on [lo, hi] to absolute tolerance ``tol``."""
        if not 0.0 <= q <= 1.0:
            raise MalformedProblemError(f"quantile {q} outside [0, 1]")
        a, b = self.lo, self.hi
        if q <= 0.0:
            return a
        if q >= 1.0:
            return b
        while b - a > tol:
            mid = 0.5 * (a + b)
            if float(self.cdf(mid)) < q:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    def partial_expectation(self, a: float, b: float, shift: float) -> float:
        """Closed form of the tail-cost kernel ``int_a^b (x - shift) pdf(x) dx``."""
        a = max(a, self.lo)
        b = min(b, self.hi)
        if b <= a:
            return 0.0
        s = self.sigma
        za, zb = a / s, b / s
        phi = lambda z: math.exp(-0.5 * z * z) / _SQRT2PI
        mean_part = s * (phi(za) - phi(zb))
        mass_part = float(ndtr(zb) - ndtr(za))
        return (mean_part - shift * mass_part) / self._mass


class ErrorModel:
    """Per-(farm, period) truncated-Gaussian forecast errors.

    ``sigma[m, t] == 0`` cells are point masses at zero error and
    contribute no risk.
    """

    def __init__(self, sigma: np.ndarray, forecast: np.ndarray, capacity: np.ndarray):
        sigma = np.asarray(sigma, dtype=float)
        forecast = np.asarray(forecast, dtype=float)
        capacity = np.asarray(capacity, dtype=float)
        if sigma.shape != forecast.shape:
            raise DimensionMismatchError("sigma and forecast shapes differ")
        if capacity.shape != (forecast.shape[0],):
            raise DimensionMismatchError("capacity needs one entry per farm")
        if np.any(sigma < 0):
            raise MalformedProblemError("sigma entries must be nonnegative")
        self.sigma = sigma
        self.forecast = forecast
        self.capacity = capacity

    @property
    def shape(self) -> tuple[int, int]:
        return self.forecast.shape

    @classmethod
    def from_scale(cls, scale: float, forecast: np.ndarray, capacity: np.ndarray) -> "ErrorModel":
        return cls(sigma_profile(scale, forecast), forecast, capacity)

    def support(self, m: int, t: int) -> tuple[float, float]:
        return (-self.forecast[m, t], self.capacity[m] - self.forecast[m, t])

    def dist(self, m: int, t: int) -> TruncatedGaussian | None:
        """The cell's distribution, or None for a point mass (sigma == 0)."""
        if self.sigma[m, t] == 0.0:
            return None
        lo, hi = self.support(m, t)
        if hi <= lo:
            return None
        return TruncatedGaussian(sigma=float(self.sigma[m, t]), lo=lo, hi=hi)
