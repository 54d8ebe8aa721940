"""Branch-and-bound: knapsack trivia, enumeration oracle, node limits."""
import itertools
from dataclasses import replace

import numpy as np
import pytest

from windadmit.errors import MalformedProblemError
from windadmit.lp import (
    GE,
    INFEASIBLE,
    LE,
    NODE_LIMIT,
    OPTIMAL,
    LpBuilder,
    solve_lp,
    solve_milp,
)


def test_tiny_knapsack():
    b = LpBuilder("max")
    a = b.add_var("a", 0, 1, obj=3.0, integer=True)
    bb = b.add_var("b", 0, 1, obj=2.0, integer=True)
    b.add_row([(a, 1.0), (bb, 1.0)], LE, 1.0)
    sol = solve_milp(b.build_milp())
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(3.0)
    assert sol.x[0] == pytest.approx(1.0) and sol.x[1] == pytest.approx(0.0)


def test_integral_relaxation_takes_one_node():
    b = LpBuilder("min")
    x = b.add_var("x", 0, 5, obj=1.0, integer=True)
    b.add_row([(x, 1.0)], GE, 3.0)
    sol = solve_milp(b.build_milp())
    assert sol.status == OPTIMAL
    assert sol.nodes == 1
    assert sol.objective == pytest.approx(3.0)


def test_infeasible_milp():
    b = LpBuilder("min")
    x = b.add_var("x", 0, 1, obj=1.0, integer=True)
    b.add_row([(x, 1.0)], GE, 2.0)
    assert solve_milp(b.build_milp()).status == INFEASIBLE


def test_unbounded_integer_rejected():
    b = LpBuilder("min")
    b.add_var("x", 0, np.inf, obj=1.0, integer=True)
    with pytest.raises(MalformedProblemError):
        b.build_milp()


def _random_milp(rng, n_bin, n_cont, m):
    sense = "min" if rng.random() < 0.5 else "max"
    b = LpBuilder(sense)
    for j in range(n_bin):
        b.add_var(f"v{j}", 0, 1, obj=float(np.round(rng.normal(0, 3), 2)), integer=True)
    for j in range(n_cont):
        b.add_var(f"y{j}", 0, 5, obj=float(np.round(rng.normal(0, 2), 2)))
    a = np.round(rng.normal(0, 1, (m, n_bin + n_cont)) * (rng.random((m, n_bin + n_cont)) < 0.6), 2)
    for i in range(m):
        rel = LE if rng.random() < 0.5 else GE
        b.add_row([(j, a[i, j]) for j in range(n_bin + n_cont) if a[i, j] != 0.0],
                  rel, float(np.round(rng.normal(1, 2), 2)))
    return b.build_milp()


def _enumerate_optimum(milp, n_bin):
    sign = 1.0 if milp.lp.sense == "min" else -1.0
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=n_bin):
        lo = milp.lp.lower.copy()
        hi = milp.lp.upper.copy()
        lo[:n_bin] = bits
        hi[:n_bin] = bits
        sol = solve_lp(replace(milp.lp, lower=lo, upper=hi))
        if sol.status == OPTIMAL:
            score = sign * sol.objective
            best = score if best is None else min(best, score)
    return best


def test_budgeted_selection_matches_enumeration():
    """Random 8-binary instances agree with brute force over all 2^8 points."""
    rng = np.random.default_rng(17)
    for _ in range(12):
        milp = _random_milp(rng, 8, 2, 5)
        got = solve_milp(milp)
        want = _enumerate_optimum(milp, 8)
        if want is None:
            assert got.status == INFEASIBLE
        else:
            sign = 1.0 if milp.lp.sense == "min" else -1.0
            assert got.status == OPTIMAL
            assert sign * got.objective == pytest.approx(want, abs=1e-7)


def test_node_limit_returns_incumbent_and_gap():
    rng = np.random.default_rng(5)
    # a knapsack with enough structure to need several nodes
    b = LpBuilder("max")
    w = rng.uniform(1, 5, 12)
    p = rng.uniform(1, 6, 12)
    for j in range(12):
        b.add_var(f"v{j}", 0, 1, obj=float(p[j]), integer=True)
    b.add_row([(j, float(w[j])) for j in range(12)], LE, float(w.sum() / 2.5))
    full = solve_milp(b.build_milp())
    assert full.status == OPTIMAL and full.nodes > 3
    limited = solve_milp(b.build_milp(), node_limit=2)
    assert limited.status == NODE_LIMIT
    if limited.x is not None:
        assert limited.objective <= full.objective + 1e-9
        assert limited.gap >= -1e-9


def test_determinism():
    rng = np.random.default_rng(23)
    milp = _random_milp(rng, 10, 2, 7)
    a = solve_milp(milp)
    b = solve_milp(milp)
    assert a.status == b.status and a.nodes == b.nodes
    if a.x is not None:
        assert np.array_equal(a.x, b.x)
