"""Error model, exact risk quadrature, PLA cuts, Monte Carlo."""
import numpy as np
import pytest

from windadmit.errors import NonMonotoneLadderError
from windadmit.grid import PriceSchedule
from windadmit.risk import (
    ErrorModel,
    PlaConfig,
    QuadratureConfig,
    TruncatedGaussian,
    adaptive_simpson,
    build_pla,
    monte_carlo_risk,
    risk_exact,
    risk_pla,
    sigma_profile,
)
from windadmit.uncertainty import AdmissibilityBoundary


@pytest.fixture(scope="module")
def small_model():
    fc = np.array([[40.0, 55.0, 30.0, 62.0]])
    cap = np.array([200.0])
    em = ErrorModel.from_scale(0.10, fc, cap)
    prices = PriceSchedule(
        curtail=np.full((1, 4), 50.0),
        shed=np.full((1, 4), 500.0),
        reg_up=np.array([100.0, 150.0, 150.0, 125.0]),
        reg_dn=np.array([20.0, 30.0, 30.0, 25.0]),
    )
    return em, prices


def test_sigma_profile_formula():
    fc = np.array([[100.0] * 5])
    prof = sigma_profile(0.1, fc)
    assert prof[0, -1] == pytest.approx(20.0)  # final period carries twice the base
    assert prof[0, 0] == pytest.approx(10.0 * (1 + np.exp(-4)))
    assert np.all(sigma_profile(0.0, fc) == 0.0)


def test_truncated_gaussian_normalization():
    d = TruncatedGaussian(sigma=10.0, lo=-50.0, hi=150.0)
    grid = np.linspace(-50, 150, 400_001)
    mass = np.trapz(d.pdf(grid), grid)
    assert mass == pytest.approx(1.0, abs=1e-6)
    for q in (0.005, 0.3, 0.5, 0.75, 0.995):
        x = d.ppf(q)
        assert float(d.cdf(x)) == pytest.approx(q, abs=1e-8)
    # inverse round-trip on the support
    for x in (-30.0, -5.0, 0.0, 12.0, 60.0):
        assert d.ppf(float(d.cdf(x))) == pytest.approx(x, abs=1e-6)


def test_partial_expectation_matches_quadrature():
    d = TruncatedGaussian(sigma=8.0, lo=-40.0, hi=120.0)
    for a, b, shift in ((3.0, 60.0, 3.0), (-40.0, -5.0, -5.0), (0.0, 120.0, 10.0)):
        closed = d.partial_expectation(a, b, shift)
        quad = adaptive_simpson(lambda x: (x - shift) * float(d.pdf(x)), a, b, 1e-10)
        assert closed == pytest.approx(quad, abs=1e-7)


def test_risk_zero_when_boundary_full(small_model):
    em, prices = small_model
    b = AdmissibilityBoundary.full_width(em.forecast, em.capacity)
    assert risk_exact(b, em, prices).total == pytest.approx(0.0, abs=1e-9)


def test_risk_exact_vs_fine_trapezoid(small_model):
    """Refinement oracle: fixed trapezoid at 10^4 panels."""
    em, prices = small_model
    m, t = 0, 1
    dist = em.dist(m, t)
    x_u = em.sigma[m, t]  # upper boundary one sigma out, lower at zero output
    b = AdmissibilityBoundary(lower=np.zeros_like(em.forecast), upper=em.forecast.copy())
    b.upper[m, t] += x_u
    b.lower[:] = 0.0
    got = risk_exact(b, em, prices)
    assert got.q_n[m, t] == pytest.approx(0.0, abs=1e-9)
    grid = np.linspace(x_u, dist.hi, 10_001)
    vals = (grid - x_u) * dist.pdf(grid)
    want = prices.reg_up[t] * np.trapz(vals, grid)
    assert got.q_p[m, t] == pytest.approx(want, rel=1e-3)


def test_risk_monotone_in_sigma(small_model):
    _, prices = small_model
    fc = np.array([[40.0, 55.0, 30.0, 62.0]])
    cap = np.array([200.0])
    b = AdmissibilityBoundary(lower=fc * 0.8, upper=fc * 1.2)
    vals = []
    for s in (0.05, 0.10, 0.15):
        em = ErrorModel.from_scale(s, fc, cap)
        vals.append(risk_exact(b, em, prices).total)
    assert vals[0] <= vals[1] <= vals[2]
    assert vals[2] > vals[0] > 0


def test_sigma_zero_riskless(small_model):
    _, prices = small_model
    fc = np.array([[40.0, 55.0, 30.0, 62.0]])
    em0 = ErrorModel.from_scale(0.0, fc, np.array([200.0]))
    b = AdmissibilityBoundary(lower=fc.copy(), upper=fc.copy())
    assert risk_exact(b, em0, prices).total == 0.0
    mc = monte_carlo_risk(b, em0, prices, 100, seed=1)
    assert mc.total == 0.0 and mc.stderr == 0.0


def test_pla_cut_signs_and_continuity(small_model):
    em, prices = small_model
    pc = build_pla(em, PlaConfig(), prices)
    assert np.all(pc.a_p <= 1e-9)
    assert np.all(pc.a_n >= -1e-9)
    # envelope evaluated at a breakpoint equals the interpolated value there
    m, t = 0, 2
    g_p = prices.reg_up[t]
    for i in (3, 7, 11):
        f = pc.f_p[m, t, i]
        env = np.max(pc.a_p[m, t] * f + pc.b_p[m, t])
        assert env == pytest.approx(g_p * pc.e_p[m, t, i], abs=1e-7, rel=1e-9)


def test_pla_sign_matches_analytic_derivative(small_model):
    """Cut slopes bracket the risk derivative: -g*(1-CDF) on the upper side."""
    em, prices = small_model
    pc = build_pla(em, PlaConfig(), prices)
    m, t = 0, 1
    dist = em.dist(m, t)
    g = prices.reg_up[t]
    for i in range(pc.a_p.shape[2]):
        f0, f1 = pc.f_p[m, t, i], pc.f_p[m, t, i + 1]
        if abs(f1 - f0) < 1e-9:
            continue
        lo_x, hi_x = sorted((f0, f1)) - em.forecast[m, t] * np.ones(2)
        d_hi = -g * (1.0 - float(dist.cdf(lo_x)))  # steepest within the span
        d_lo = -g * (1.0 - float(dist.cdf(hi_x)))
        assert d_hi - 1e-6 <= pc.a_p[m, t, i] <= d_lo + 1e-6


def test_pla_full_width_and_fidelity(small_model):
    em, prices = small_model
    pc = build_pla(em, PlaConfig(), prices)
    full = AdmissibilityBoundary.full_width(em.forecast, em.capacity)
    assert risk_pla(full, pc).total == pytest.approx(0.0, abs=1e-6)
    rng = np.random.default_rng(8)
    fc = em.forecast
    for _ in range(40):
        b = AdmissibilityBoundary(
            lower=fc * rng.random(fc.shape),
            upper=fc + (em.capacity[:, None] - fc) * rng.random(fc.shape),
        )
        exact = risk_exact(b, em, prices).total
        approx = risk_pla(b, pc).total
        assert abs(approx - exact) <= max(0.05 * exact, 1.0)


def test_pla_budget_doubling_never_worse(small_model):
    em, prices = small_model
    pc4 = build_pla(em, PlaConfig(z=4), prices)
    pc8 = build_pla(em, PlaConfig(z=8), prices)
    rng = np.random.default_rng(4)
    fc = em.forecast
    worst4 = worst8 = 0.0
    for _ in range(25):
        b = AdmissibilityBoundary(
            lower=fc * rng.random(fc.shape),
            upper=fc + (em.capacity[:, None] - fc) * rng.random(fc.shape),
        )
        exact = risk_exact(b, em, prices).total
        worst4 = max(worst4, abs(risk_pla(b, pc4).total - exact))
        worst8 = max(worst8, abs(risk_pla(b, pc8).total - exact))
    assert worst8 <= worst4 + 1e-9


def test_pla_monotone_under_inclusion(small_model):
    em, prices = small_model
    pc = build_pla(em, PlaConfig(), prices)
    fc = em.forecast
    inner = AdmissibilityBoundary(lower=fc * 0.7, upper=fc * 1.25)
    outer = AdmissibilityBoundary(lower=fc * 0.5, upper=fc * 1.6)
    assert outer.contains(inner)
    assert risk_pla(outer, pc).total <= risk_pla(inner, pc).total + 1e-9


def test_pla_decomposition_locality(small_model):
    em, prices = small_model
    pc = build_pla(em, PlaConfig(), prices)
    fc = em.forecast
    base = AdmissibilityBoundary(lower=fc * 0.8, upper=fc * 1.2)
    wider_up = AdmissibilityBoundary(lower=fc * 0.8, upper=fc * 1.5)
    r1, r2 = risk_pla(base, pc), risk_pla(wider_up, pc)
    assert np.allclose(r1.q_n, r2.q_n)
    assert r2.q_p.sum() < r1.q_p.sum()


def test_ladder_validation():
    with pytest.raises(NonMonotoneLadderError):
        PlaConfig(alphas=(0.025, 0.005, 0.495))
    with pytest.raises(NonMonotoneLadderError):
        PlaConfig(alphas=(0.005, 0.025, 0.6))
    with pytest.raises(NonMonotoneLadderError):
        PlaConfig(z=0)


def test_printed_layout_available(small_model):
    """The uniform, density-chord construction stays available for reference."""
    em, prices = small_model
    pc = build_pla(em, PlaConfig(adaptive=False), prices)
    fc = em.forecast
    b = AdmissibilityBoundary(lower=fc * 0.9, upper=fc * 1.1)
    val = risk_pla(b, pc).total
    exact = risk_exact(b, em, prices).total
    assert val > 0
    # near the forecast the printed layout tracks within a loose band
    assert abs(val - exact) <= 0.35 * exact


def test_monte_carlo_consistency(small_model):
    em, prices = small_model
    fc = em.forecast
    b = AdmissibilityBoundary(
        lower=np.maximum(fc - em.sigma, 0.0),
        upper=np.minimum(fc + em.sigma, em.capacity[:, None]),
    )
    mc = monte_carlo_risk(b, em, prices, 150_000, seed=13)
    exact = risk_exact(b, em, prices)
    assert abs(mc.total - exact.total) <= 3.0 * mc.stderr
    again = monte_carlo_risk(b, em, prices, 150_000, seed=13)
    assert again.total == mc.total
    assert np.array_equal(again.q_p, mc.q_p)
    # a different worker count re-partitions substreams deterministically
    split = monte_carlo_risk(b, em, prices, 150_000, seed=13, worker_count=3)
    split2 = monte_carlo_risk(b, em, prices, 150_000, seed=13, worker_count=3)
    assert split.total == split2.total
    assert abs(split.total - exact.total) <= 3.0 * split.stderr


def test_monte_carlo_full_width_zero(small_model):
    em, prices = small_model
    b = AdmissibilityBoundary.full_width(em.forecast, em.capacity)
    mc = monte_carlo_risk(b, em, prices, 5_000, seed=3)
    assert mc.total == 0.0
