"""Monte Carlo validation of the risk integral.

Samples forecast errors from the truncated error model and averages the
emergency-regulation cost of realizations outside the boundary.  Fixed
(seed, worker count) pairs reproduce bit-for-bit: every worker owns a
spawned substream keyed (seed, farm, period, worker), cells are visited in
a fixed order, and accumulation uses fixed-size batches reduced in order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..grid import PriceSchedule
from ..uncertainty import AdmissibilityBoundary
from .error_model import ErrorModel
from .quadrature import RiskValue

_BATCH = 100_000


@dataclass
class MonteCarloRisk(RiskValue):
    stderr: float = 0.0
    n_samples: int = 0
    seed: int = 0
    worker_count: int = 1


def _sample_cell(rng: np.random.Generator, sigma: float, lo: float, hi: float,
                 n: int) -> np.ndarray:
    """Rejection-sample a zero-mean truncated Gaussian (acceptance ~1 here)."""
    out = np.empty(n)
    have = 0
    while have < n:
        draw = rng.normal(0.0, sigma, size=max(n - have, 1024))
        keep = draw[(draw >= lo) & (draw <= hi)]
        take = min(keep.size, n - have)
        out[have : have + take] = keep[:take]
        have += take
    return out


def monte_carlo_risk(
    boundary: AdmissibilityBoundary,
    em: ErrorModel,
    prices: PriceSchedule,
    n_samples: int,
    seed: int,
    worker_count: int = 1,
) -> MonteCarloRisk:
    """Estimate the risk of a boundary with ``n_samples`` per cell.

    The standard error reported is for the total: cells are independent,
    so their estimator variances add.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if worker_count < 1:
        raise ValueError("worker_count must be at least 1")
    boundary.validate(em.forecast, em.capacity)
    m_count, t_count = em.shape
    q_p = np.zeros((m_count, t_count))
    q_n = np.zeros((m_count, t_count))
    var_total = 0.0

    counts = [n_samples // worker_count] * worker_count
    for w in range(n_samples % worker_count):
        counts[w] += 1

    for m in range(m_count):
        for t in range(t_count):
            dist = em.dist(m, t)
            if dist is None:
                continue
            x_u = boundary.upper[m, t] - em.forecast[m, t]
            x_l = boundary.lower[m, t] - em.forecast[m, t]
            g_p, g_n = float(prices.reg_up[t]), float(prices.reg_dn[t])
            sum_p = sum_n = sum_sq = 0.0
            for w in range(worker_count):
                rng = np.random.default_rng([seed, m, t, w])
                remaining = counts[w]
                while remaining > 0:
                    take = min(_BATCH, remaining)
                    delta = _sample_cell(rng, dist.sigma, dist.lo, dist.hi, take)
                    over = g_p * np.maximum(delta - x_u, 0.0)
                    under = g_n * np.maximum(x_l - delta, 0.0)
                    sum_p += float(over.sum())
                    sum_n += float(under.sum())
                    cost = over + under
                    sum_sq += float((cost * cost).sum())
                    remaining -= take
            q_p[m, t] = sum_p / n_samples
            q_n[m, t] = sum_n / n_samples
            mean = q_p[m, t] + q_n[m, t]
            var = max(sum_sq / n_samples - mean * mean, 0.0)
            var_total += var / n_samples

    return MonteCarloRisk(
        total=float(q_p.sum() + q_n.sum()),
        q_p=q_p,
        q_n=q_n,
        stderr=math.sqrt(var_total),
        n_samples=n_samples,
        seed=seed,
        worker_count=worker_count,
    )
