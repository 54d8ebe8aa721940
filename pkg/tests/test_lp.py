"""LP kernel: trivial cases, duality, determinism, text round-trip."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windadmit.errors import MalformedProblemError
from windadmit.lp import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    LpBuilder,
    dump_problem,
    parse_problem,
    solve_lp,
)


def test_bound_attained_max():
    b = LpBuilder("max")
    b.add_var("x", 0.0, 1.0, obj=1.0)
    sol = solve_lp(b.build())
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(1.0)
    assert sol.x[0] == pytest.approx(1.0)


def test_contradictory_constraints_infeasible():
    b = LpBuilder("min")
    x = b.add_var("x", -np.inf, np.inf, obj=1.0)
    b.add_row([(x, 1.0)], GE, 2.0)
    b.add_row([(x, 1.0)], LE, 1.0)
    assert solve_lp(b.build()).status == INFEASIBLE


def test_single_constraint_strong_duality():
    b = LpBuilder("min")
    x = b.add_var("x", -np.inf, np.inf, obj=1.0)
    b.add_row([(x, 1.0)], GE, 3.0)
    lp = b.build()
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(3.0)
    assert sol.duals[0] == pytest.approx(1.0)
    assert sol.dual_objective(lp) == pytest.approx(3.0)


def test_unbounded_detected():
    b = LpBuilder("max")
    b.add_var("x", 0.0, np.inf, obj=1.0)
    assert solve_lp(b.build()).status == UNBOUNDED


def test_equality_row_and_free_dual():
    b = LpBuilder("min")
    x = b.add_var("x", 0.0, 2.0, obj=1.0)
    y = b.add_var("y", 0.0, np.inf, obj=3.0)
    b.add_row([(x, 1.0), (y, 1.0)], EQ, 5.0)
    lp = b.build()
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(2.0 + 3.0 * 3.0)
    gap = abs(sol.objective - sol.dual_objective(lp))
    assert gap <= 1e-6 * (1.0 + abs(sol.objective))


def test_malformed_rejected():
    b = LpBuilder("min")
    j = b.add_var("x", 1.0, 0.0)  # inverted bounds
    with pytest.raises(MalformedProblemError):
        b.build()
    b2 = LpBuilder("min")
    b2.add_var("x")
    with pytest.raises(MalformedProblemError):
        b2.add_row([(7, 1.0)], LE, 0.0)


def _random_lp(rng, n, m):
    sense = "min" if rng.random() < 0.5 else "max"
    lo = np.round(rng.normal(-2, 2, n), 3)
    hi = lo + np.abs(np.round(rng.normal(3, 2, n), 3))
    x0 = lo + (hi - lo) * rng.random(n)
    c = np.round(rng.normal(0, 2, n), 3)
    a = np.round(rng.normal(0, 1, (m, n)) * (rng.random((m, n)) < 0.5), 3)
    rels = [[LE, GE, EQ][k] for k in rng.integers(0, 3, m)]
    slack = rng.random(m) * 2.0
    rhs = a @ x0 + np.array(
        [s if r == LE else (-s if r == GE else 0.0) for r, s in zip(rels, slack)]
    )
    b = LpBuilder(sense)
    for j in range(n):
        b.add_var(f"x{j}", lo[j], hi[j], obj=c[j])
    for i in range(m):
        b.add_row([(j, a[i, j]) for j in range(n) if a[i, j] != 0.0], rels[i], rhs[i])
    return b.build()


def test_random_lps_duality_and_feasibility():
    rng = np.random.default_rng(31)
    for _ in range(120):
        lp = _random_lp(rng, int(rng.integers(2, 20)), int(rng.integers(1, 15)))
        sol = solve_lp(lp)
        assert sol.status == OPTIMAL
        # strong duality
        gap = abs(sol.objective - sol.dual_objective(lp))
        assert gap <= 1e-6 * (1.0 + abs(sol.objective))
        # primal feasibility and complementary slackness
        r = lp.a @ sol.x
        sign = 1.0 if lp.sense == "min" else -1.0
        y = sign * sol.duals
        for i, rel in enumerate(lp.relations):
            resid = r[i] - lp.rhs[i]
            if rel == LE:
                assert resid <= 1e-6 * (1 + abs(lp.rhs[i]))
                assert abs(y[i] * resid) <= 1e-5 * (1 + abs(sol.objective))
            elif rel == GE:
                assert -resid <= 1e-6 * (1 + abs(lp.rhs[i]))
                assert abs(y[i] * resid) <= 1e-5 * (1 + abs(sol.objective))
            else:
                assert abs(resid) <= 1e-6 * (1 + abs(lp.rhs[i]))


def test_determinism_bit_for_bit():
    rng = np.random.default_rng(99)
    lp = _random_lp(rng, 15, 10)
    a = solve_lp(lp)
    b = solve_lp(lp)
    assert a.objective == b.objective
    assert np.array_equal(a.x, b.x)
    assert np.array_equal(a.duals, b.duals)


@settings(max_examples=30, deadline=None)
@given(
    c1=st.floats(-3, 3), c2=st.floats(-3, 3),
    u1=st.floats(0.5, 4), u2=st.floats(0.5, 4),
    rhs=st.floats(0.5, 6),
)
def test_two_var_knapsack_lp_matches_closed_form(c1, c2, u1, u2, rhs):
    """min c.x st x1 + x2 >= rhs, 0 <= x <= u: fill the cheaper variable first."""
    if u1 + u2 < rhs:
        b = LpBuilder("min")
        x1 = b.add_var("x1", 0, u1, obj=c1)
        x2 = b.add_var("x2", 0, u2, obj=c2)
        b.add_row([(x1, 1.0), (x2, 1.0)], GE, rhs)
        assert solve_lp(b.build()).status == INFEASIBLE
        return
    b = LpBuilder("min")
    x1 = b.add_var("x1", 0, u1, obj=c1)
    x2 = b.add_var("x2", 0, u2, obj=c2)
    b.add_row([(x1, 1.0), (x2, 1.0)], GE, rhs)
    sol = solve_lp(b.build())
    assert sol.status == OPTIMAL
    # enumerate the polygon's vertices exactly
    cands = [(u1, u2), (u1, max(0.0, rhs - u1)), (max(0.0, rhs - u2), u2),
             (u1, 0.0), (0.0, u2), (min(rhs, u1), max(0.0, rhs - min(rhs, u1))),
             (max(0.0, rhs - u2), min(rhs, u2))]
    best = min(
        c1 * f1 + c2 * f2
        for f1, f2 in cands
        if 0 <= f1 <= u1 and 0 <= f2 <= u2 and f1 + f2 >= rhs - 1e-12
    )
    assert sol.objective == pytest.approx(best, abs=1e-6, rel=1e-6)


def test_dump_parse_roundtrip():
    rng = np.random.default_rng(3)
    lp = _random_lp(rng, 6, 4)
    text = dump_problem(lp)
    back = parse_problem(text)
    assert np.array_equal(back.lp.obj, lp.obj)
    assert np.array_equal(back.lp.a, lp.a)
    assert np.array_equal(back.lp.rhs, lp.rhs)
    assert back.lp.relations == lp.relations
    assert np.array_equal(back.lp.lower, lp.lower)
    assert np.array_equal(back.lp.upper, lp.upper)
    s1, s2 = solve_lp(lp), solve_lp(back.lp)
    assert s1.objective == s2.objective
