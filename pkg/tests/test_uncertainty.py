"""Uncertainty set: realization, enumeration, counting."""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windadmit.errors import CapExceededError, MalformedProblemError
from windadmit.uncertainty import (
    AdmissibilityBoundary,
    UncertaintyBudgets,
    UncertaintyVertex,
    count_vertices,
    enumerate_vertices,
    realize_wind,
)


def _boundary(fc, cap):
    return AdmissibilityBoundary(lower=fc * 0.4, upper=fc + (cap[:, None] - fc) * 0.5)


def test_realize_substitutions():
    fc = np.array([[30.0, 40.0]])
    cap = np.array([100.0])
    b = _boundary(fc, cap)
    v = UncertaintyVertex.zero(1, 2)
    assert np.array_equal(realize_wind(v, b, fc), fc)
    v.up[0, 0] = 1
    w = realize_wind(v, b, fc)
    assert w[0, 0] == pytest.approx(b.upper[0, 0])
    assert w[0, 1] == pytest.approx(fc[0, 1])
    v.up[0, 0] = 0
    v.down[0, 1] = 1
    w = realize_wind(v, b, fc)
    assert w[0, 1] == pytest.approx(b.lower[0, 1])


def test_degenerate_boundary_constant_realization():
    fc = np.array([[30.0, 40.0]])
    b = AdmissibilityBoundary(lower=fc.copy(), upper=fc.copy())
    for up, dn in itertools.product((0, 1), repeat=2):
        if up and dn:
            continue
        v = UncertaintyVertex.zero(1, 2)
        v.up[0, 0], v.down[0, 0] = up, dn
        assert np.array_equal(realize_wind(v, b, fc), fc)


def test_vertex_invariants_enforced():
    budgets = UncertaintyBudgets(gamma_t=1, gamma_s=1)
    v = UncertaintyVertex.zero(1, 2)
    v.up[0, 0] = 1
    v.down[0, 0] = 1
    with pytest.raises(MalformedProblemError):
        v.validate(budgets)
    v = UncertaintyVertex.zero(1, 2)
    v.up[0, 0] = 1
    v.up[0, 1] = 1  # exceeds time budget
    with pytest.raises(MalformedProblemError):
        v.validate(budgets)


def test_enumeration_counts_small_cases():
    assert count_vertices(1, 2, UncertaintyBudgets(1, 1)) == 5
    assert count_vertices(1, 2, UncertaintyBudgets(0, 1)) == 1
    assert count_vertices(2, 1, UncertaintyBudgets(1, 1)) == 5
    vs = list(enumerate_vertices(1, 2, UncertaintyBudgets(1, 1)))
    assert len(vs) == 5
    assert all(v.up.sum() + v.down.sum() <= 1 for v in vs)
    # first vertex is all-zero, order is lexicographic over the bit string
    keys = [v.key() for v in vs]
    assert keys[0] == (0, 0, 0, 0)
    assert keys == sorted(keys)


def test_enumeration_matches_brute_force():
    budgets = UncertaintyBudgets(gamma_t=2, gamma_s=2)
    m, t = 2, 3
    brute = 0
    for states in itertools.product((0, 1, 2), repeat=m * t):
        up = np.array([1 if s == 1 else 0 for s in states]).reshape(m, t)
        dn = np.array([1 if s == 2 else 0 for s in states]).reshape(m, t)
        if ((up + dn).sum(axis=1) <= budgets.gamma_t).all() and (
            (up + dn).sum(axis=0) <= budgets.gamma_s
        ).all():
            brute += 1
    assert count_vertices(m, t, budgets) == brute
    listed = list(enumerate_vertices(m, t, budgets, cap=brute))
    assert len(listed) == brute
    for v in listed:
        v.validate(budgets)


def test_cap_exceeded_reports_exact_count():
    with pytest.raises(CapExceededError) as exc:
        list(enumerate_vertices(2, 6, UncertaintyBudgets(6, 2), cap=10))
    assert exc.value.count == count_vertices(2, 6, UncertaintyBudgets(6, 2))


@settings(max_examples=40, deadline=None)
@given(
    up_bits=st.lists(st.booleans(), min_size=4, max_size=4),
    frac=st.floats(0.0, 1.0),
)
def test_realization_always_inside_physical_range(up_bits, frac):
    fc = np.array([[20.0, 35.0, 10.0, 42.0]])
    cap = np.array([80.0])
    b = AdmissibilityBoundary(
        lower=fc * frac, upper=fc + (cap[:, None] - fc) * frac
    )
    v = UncertaintyVertex.zero(1, 4)
    for t, bit in enumerate(up_bits):
        if bit:
            v.up[0, t] = 1
        elif t % 2:
            v.down[0, t] = 1
    w = realize_wind(v, b, fc)
    assert np.all(w >= -1e-9)
    assert np.all(w <= cap[:, None] + 1e-9)
    inside = (w >= b.lower - 1e-9) & (w <= b.upper + 1e-9)
    at_fc = np.isclose(w, fc)
    assert np.all(inside | at_fc)


def test_boundary_validation(case9):
    net, _ = case9
    fc = net.forecast()
    cap = net.capacities()
    good = AdmissibilityBoundary.full_width(fc, cap)
    good.validate(fc, cap)
    bad = AdmissibilityBoundary(lower=fc + 1.0, upper=fc)
    with pytest.raises(MalformedProblemError):
        bad.validate(fc, cap)


def test_boundary_inclusion_helper():
    fc = np.array([[30.0, 40.0]])
    cap = np.array([100.0])
    wide = AdmissibilityBoundary.full_width(fc, cap)
    narrow = _boundary(fc, cap)
    assert wide.contains(narrow)
    assert not narrow.contains(wide)
