"""Piecewise-linear risk approximation producing the master's affine cuts.

Per (farm, period) cell and boundary side, the risk-vs-boundary curve is
convex and decays from its value at the forecast to zero at the physical
output limit.  The cuts are the chords of that curve through a fixed
number of breakpoints: ``(S + 1) * Z`` per side for a confidence ladder
with S levels and Z subdivisions per quantile segment.  Because the curve
is convex, the pointwise maximum of the chords is its piecewise-linear
interpolant, which is what the epigraph constraints in the master LP
realize.

Two breakpoint layouts are available:

* ``adaptive=True`` (default): breakpoints start at the ladder quantiles
  and are refined greedily, always splitting the subinterval whose chord
  currently overshoots the exact curve the most (overshoot scored against
  a relative band plus an absolute floor).  Cumulative values come from
  the closed-form tail-cost kernel of the error distribution, so every
  cut touches the exact curve.  Refinement is nested: raising Z never
  increases the approximation error.

* ``adaptive=False``: the printed-style layout.  Quantile segments are
  subdivided uniformly in output space and the density itself is replaced
  by chords between the ladder quantiles before integrating.  With a
  short ladder this inflates tail mass (the outermost chord spans from
  the last finite quantile to the physical support edge, tens of standard
  deviations at fixture scale), so it is kept for cross-checking only;
  ``exact_tail=True`` substitutes the exact density on the outermost
  segment.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatchError, NonMonotoneLadderError
from ..grid import PriceSchedule
from ..uncertainty import AdmissibilityBoundary
from .error_model import ErrorModel, TruncatedGaussian
from .quadrature import RiskValue

DEFAULT_ALPHAS = (0.005, 0.025, 0.495)
DEFAULT_Z = 4

_REL_BAND = 0.03  # relative error targeted by greedy refinement
_ABS_FLOOR = 0.10  # $ per cell, keeps deep-tail chords near the exact curve


@dataclass(frozen=True)
class PlaConfig:
    """Confidence ladder (tail levels, ascending) and per-segment subdivisions."""

    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    z: int = DEFAULT_Z
    adaptive: bool = True
    exact_tail: bool = True  # only consulted when adaptive=False

    def __post_init__(self):
        if self.z < 1:
            raise NonMonotoneLadderError("subdivision count Z must be at least 1")
        ladder = tuple(self.alphas)
        if not ladder or any(not 0.0 < a < 0.5 for a in ladder):
            raise NonMonotoneLadderError("ladder levels must lie strictly inside (0, 0.5)")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise NonMonotoneLadderError("ladder levels must be strictly increasing")

    @property
    def n_levels(self) -> int:
        return len(self.alphas)

    @property
    def cuts_per_side(self) -> int:
        return (len(self.alphas) + 1) * self.z


@dataclass
class PlaCoefficients:
    """Cut slopes/intercepts per (farm, period, cut index).

    ``a_p/b_p`` bound the upper-boundary (underestimation) risk with
    nonpositive slopes; ``a_n/b_n`` bound the lower-boundary
    (overestimation) risk with nonnegative slopes.  ``f_*``/``e_*`` keep
    the breakpoints (MW) and the price-free cumulative values the cuts
    interpolate; ``c_*``/``d_*`` keep the density segment chords used by
    the non-adaptive layout.
    """

    a_p: np.ndarray  # (M, T, K)
    b_p: np.ndarray
    a_n: np.ndarray
    b_n: np.ndarray
    f_p: np.ndarray  # (M, T, K + 1)
    e_p: np.ndarray
    f_n: np.ndarray
    e_n: np.ndarray
    c_p: np.ndarray  # (M, T, S + 1)
    d_p: np.ndarray
    c_n: np.ndarray
    d_n: np.ndarray
    config: PlaConfig

    @property
    def shape(self) -> tuple[int, int]:
        return self.a_p.shape[:2]


def _weighted_linear(c: float, d: float, x: float, a: float, b: float) -> float:
    """``int_a^b (delta - x) (c*delta + d) d delta`` in closed form."""
    if b <= a:
        return 0.0
    return (
        c * (b**3 - a**3) / 3.0
        + (d - c * x) * (b**2 - a**2) / 2.0
        - d * x * (b - a)
    )


class _Side:
    """One boundary side of one cell: exact and density-chord cumulatives.

    Positions are in error space; the positive side measures risk beyond
    an upper position x >= 0, the negative side below x <= 0.
    """

    def __init__(self, dist: TruncatedGaussian, knots: np.ndarray, positive: bool):
        self.dist = dist
        self.positive = positive
        self.knots = knots  # outer endpoint ... 0, monotone toward zero
        y = dist.pdf(knots)
        self.seg_c = np.zeros(len(knots) - 1)
        self.seg_d = np.zeros(len(knots) - 1)
        for s in range(len(knots) - 1):
            a, b = knots[s], knots[s + 1]
            if a == b:
                self.seg_c[s], self.seg_d[s] = 0.0, float(y[s])
            else:
                self.seg_c[s] = (y[s + 1] - y[s]) / (b - a)
                self.seg_d[s] = y[s] - self.seg_c[s] * a

    def exact(self, x: float) -> float:
        if self.positive:
            return self.dist.partial_expectation(x, self.dist.hi, x)
        return -self.dist.partial_expectation(self.dist.lo, x, x)

    def chorded(self, x: float, exact_tail: bool) -> float:
        """Cumulative value under the density-chord (printed) construction."""
        total = 0.0
        for s in range(len(self.knots) - 1):
            a, b = sorted((float(self.knots[s]), float(self.knots[s + 1])))
            if self.positive:
                a = max(a, x)
            else:
                b = min(b, x)
            if b <= a:
                continue
            if s == 0 and exact_tail:
                val = self.dist.partial_expectation(a, b, x)
            else:
                val = _weighted_linear(float(self.seg_c[s]), float(self.seg_d[s]), x, a, b)
            total += val if self.positive else -val
        return total


def _uniform_breaks(knots: np.ndarray, z: int) -> np.ndarray:
    breaks: list[float] = []
    for s in range(len(knots) - 1):
        for k in range(z):
            breaks.append(float(knots[s] + k * (knots[s + 1] - knots[s]) / z))
    breaks.append(float(knots[-1]))
    return np.array(breaks)


_SPLIT_PROBE = (0.2, 0.35, 0.5, 0.65, 0.8)


def _adaptive_breaks(side: _Side, n_intervals: int, price: float) -> np.ndarray:
    """Greedy chord refinement: repeatedly split the subinterval whose chord
    overshoots the exact convex curve the most, scored against a relative
    band plus an absolute floor.  Each interval is probed at a few interior
    positions and split where its overshoot peaks.  Splits are nested, so a
    larger budget never yields a worse approximation."""
    pts = sorted(float(k) for k in side.knots)
    vals = {x: side.exact(x) for x in pts}

    def probe(i: int) -> tuple[float, float]:
        a, b = pts[i], pts[i + 1]
        ea, eb = vals[a], vals[b]
        best_over, best_at = 0.0, 0.5 * (a + b)
        for frac in _SPLIT_PROBE:
            x = a + frac * (b - a)
            over = ea + frac * (eb - ea) - side.exact(x)
            if over > best_over:
                best_over, best_at = over, x
        score = price * best_over / (_REL_BAND * price * side.exact(best_at) + _ABS_FLOOR)
        return score, best_at

    while len(pts) - 1 < n_intervals:
        best_score, best_idx, best_at = -1.0, -1, 0.0
        for i in range(len(pts) - 1):
            if pts[i + 1] - pts[i] <= 1e-9:
                continue
            score, at = probe(i)
            if score > best_score + 1e-15:
                best_score, best_idx, best_at = score, i, at
        if best_idx < 0:  # everything degenerate; split the widest interval
            widths = [pts[i + 1] - pts[i] for i in range(len(pts) - 1)]
            best_idx = int(np.argmax(widths))
            best_at = 0.5 * (pts[best_idx] + pts[best_idx + 1])
        vals[best_at] = side.exact(best_at)
        pts.insert(best_idx + 1, best_at)
    return np.array(pts)


def build_pla(em: ErrorModel, cfg: PlaConfig, prices: PriceSchedule) -> PlaCoefficients:
    """Construct the affine risk cuts for every (farm, period) cell."""
    m_count, t_count = em.shape
    if prices.reg_up.shape != (t_count,):
        raise DimensionMismatchError("regulation price series length differs from horizon")
    s_count = cfg.n_levels
    k = cfg.cuts_per_side
    shape_cut = (m_count, t_count, k)
    shape_pt = (m_count, t_count, k + 1)
    out = PlaCoefficients(
        a_p=np.zeros(shape_cut), b_p=np.zeros(shape_cut),
        a_n=np.zeros(shape_cut), b_n=np.zeros(shape_cut),
        f_p=np.zeros(shape_pt), e_p=np.zeros(shape_pt),
        f_n=np.zeros(shape_pt), e_n=np.zeros(shape_pt),
        c_p=np.zeros((m_count, t_count, s_count + 1)),
        d_p=np.zeros((m_count, t_count, s_count + 1)),
        c_n=np.zeros((m_count, t_count, s_count + 1)),
        d_n=np.zeros((m_count, t_count, s_count + 1)),
        config=cfg,
    )
    for m in range(m_count):
        for t in range(t_count):
            dist = em.dist(m, t)
            w_hat = em.forecast[m, t]
            if dist is None:
                # point mass: zero risk everywhere, inert cuts
                out.f_p[m, t, :] = em.capacity[m]
                continue
            y0 = float(dist.cdf(0.0))
            if not all(a < y0 for a in cfg.alphas):
                raise NonMonotoneLadderError(
                    f"ladder level >= CDF(0)={y0:.4f} at cell ({m}, {t})"
                )
            knots_n = np.array([dist.lo] + [dist.ppf(a) for a in cfg.alphas] + [0.0])
            knots_p = np.array([dist.hi] + [dist.ppf(1.0 - a) for a in cfg.alphas] + [0.0])
            if np.any(np.diff(knots_n) < 0) or np.any(np.diff(knots_p) > 0):
                raise NonMonotoneLadderError(f"quantile knots not monotone at cell ({m}, {t})")
            g_p, g_n = float(prices.reg_up[t]), float(prices.reg_dn[t])

            for positive, knots, price, f_arr, e_arr, a_arr, b_arr, c_arr, d_arr in (
                (True, knots_p, g_p, out.f_p, out.e_p, out.a_p, out.b_p, out.c_p, out.d_p),
                (False, knots_n, g_n, out.f_n, out.e_n, out.a_n, out.b_n, out.c_n, out.d_n),
            ):
                side = _Side(dist, knots, positive)
                c_arr[m, t], d_arr[m, t] = side.seg_c, side.seg_d
                if cfg.adaptive:
                    breaks = _adaptive_breaks(side, k, price)
                    if positive:
                        breaks = breaks[::-1]  # run outer -> inner like the ladder
                    e_vals = np.array([side.exact(float(x)) for x in breaks])
                else:
                    breaks = _uniform_breaks(knots, cfg.z)
                    e_vals = np.array(
                        [side.chorded(float(x), cfg.exact_tail) for x in breaks]
                    )
                f_arr[m, t] = breaks + w_hat
                e_arr[m, t] = e_vals
                for i in range(k):
                    df = f_arr[m, t, i + 1] - f_arr[m, t, i]
                    if abs(df) > 1e-12:
                        slope = (e_vals[i + 1] - e_vals[i]) / df
                        a_arr[m, t, i] = price * slope
                        b_arr[m, t, i] = price * (e_vals[i] - slope * f_arr[m, t, i])
    return out


def risk_pla(boundary: AdmissibilityBoundary, pc: PlaCoefficients) -> RiskValue:
    """Risk under the piecewise-linear measure: per-cell maximum over cuts."""
    if boundary.shape != pc.shape:
        raise DimensionMismatchError("boundary shape disagrees with PLA coefficients")
    up = boundary.upper[:, :, None]
    lo = boundary.lower[:, :, None]
    q_p = np.max(pc.a_p * up + pc.b_p, axis=2)
    q_n = np.max(pc.a_n * lo + pc.b_n, axis=2)
    q_p = np.maximum(q_p, 0.0)
    q_n = np.maximum(q_n, 0.0)
    return RiskValue(total=float(q_p.sum() + q_n.sum()), q_p=q_p, q_n=q_n)
