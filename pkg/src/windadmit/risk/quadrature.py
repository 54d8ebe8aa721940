"""Exact operational-risk evaluation by adaptive Simpson quadrature.

The risk of a boundary is the expected cost of emergency regulation for
wind realizations outside it: an up-regulation price times the expected
shortfall below the lower bound, plus a down-regulation-side price times
the expected surplus above the upper bound, summed over farms and periods.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import QuadratureError
from ..grid import PriceSchedule
from ..uncertainty import AdmissibilityBoundary
from .error_model import ErrorModel, TruncatedGaussian


@dataclass
class QuadratureConfig:
    tol: float = 1e-6  # absolute $ tolerance per (farm, period) term
    max_depth: int = 48


@dataclass
class RiskValue:
    """Total $ risk plus its per-(farm, period) decomposition."""

    total: float
    q_p: np.ndarray  # underestimation side (upper boundary), (M, T)
    q_n: np.ndarray  # overestimation side (lower boundary), (M, T)


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 48) -> float:
    """Recursive adaptive Simpson rule with Richardson error control."""
    if b <= a:
        return 0.0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol_here, depth):
        x1 = 0.5 * (x0 + x2)
        lm, rm = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        flm, frm = f(lm), f(rm)
        left = simpson(x0, x1, f0, flm, f1)
        right = simpson(x1, x2, f1, frm, f2)
        err = left + right - whole
        if abs(err) <= 15.0 * tol_here:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson hit depth {max_depth}", achieved_tol=abs(err)
            )
        return (
            recurse(x0, x1, f0, flm, f1, left, tol_here / 2.0, depth + 1)
            + recurse(x1, x2, f1, frm, f2, right, tol_here / 2.0, depth + 1)
        )

    mid = 0.5 * (a + b)
    f0, f1, f2 = f(a), f(mid), f(b)
    return recurse(a, b, f0, f1, f2, simpson(a, b, f0, f1, f2), tol, 0)


def _segmented_breaks(a: float, b: float, sigma: float) -> list[float]:
    """Break [a, b] at sigma multiples so nearly-flat tails cannot fool the
    adaptive rule into terminating before it sees the density bump."""
    marks = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0]
    pts = {a, b}
    for s in marks:
        for x in (s * sigma, -s * sigma):
            if a < x < b:
                pts.add(x)
    return sorted(pts)


def _tail_integral(
    dist: TruncatedGaussian, x: float, lo: float, hi: float, sign: float, cfg: QuadratureConfig
) -> float:
    """``int (sign * (delta - x)) * pdf`` over [lo, hi] by segment-wise Simpson."""
    lo = max(lo, dist.lo)
    hi = min(hi, dist.hi)
    if hi <= lo:
        return 0.0
    pts = _segmented_breaks(lo, hi, dist.sigma)
    tol_each = cfg.tol / max(len(pts) - 1, 1)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += adaptive_simpson(
            lambda d: sign * (d - x) * float(dist.pdf(d)), a, b, tol_each, cfg.max_depth
        )
    return total


def risk_exact(
    boundary: AdmissibilityBoundary,
    em: ErrorModel,
    prices: PriceSchedule,
    cfg: QuadratureConfig | None = None,
) -> RiskValue:
    """Numerically exact risk of a boundary under the error model."""
    cfg = cfg or QuadratureConfig()
    boundary.validate(em.forecast, em.capacity)
    m_count, t_count = em.shape
    q_p = np.zeros((m_count, t_count))
    q_n = np.zeros((m_count, t_count))
    for m in range(m_count):
        for t in range(t_count):
            dist = em.dist(m, t)
            if dist is None:
                continue
            x_u = boundary.upper[m, t] - em.forecast[m, t]
            x_l = boundary.lower[m, t] - em.forecast[m, t]
            q_p[m, t] = prices.reg_up[t] * _tail_integral(dist, x_u, x_u, dist.hi, +1.0, cfg)
            q_n[m, t] = prices.reg_dn[t] * _tail_integral(dist, x_l, dist.lo, x_l, -1.0, cfg)
    q_p = np.maximum(q_p, 0.0)
    q_n = np.maximum(q_n, 0.0)
    return RiskValue(total=float(q_p.sum() + q_n.sum()), q_p=q_p, q_n=q_n)
