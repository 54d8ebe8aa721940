"""Case parsing, recourse LP assembly, and scenario evaluation."""
import json

import numpy as np
import pytest

from windadmit.errors import (
    CaseSchemaError,
    DanglingReferenceError,
    DimensionMismatchError,
    MalformedProblemError,
)
from windadmit.grid import (
    UcSchedule,
    assemble_recourse_lp,
    dump_case,
    evaluate_scenario,
    load_case,
    recourse_tally,
)
from conftest import two_bus_doc


def test_bundled_fixture_shape(case9):
    net, prices = case9
    assert net.n_gens == 3
    assert net.n_lines == 9
    assert net.n_farms == 1
    assert net.wind_farms[0].capacity_mw == 250.0
    assert net.wind_farms[0].bus == 0  # bus 1 in file numbering
    assert net.n_periods == 24
    assert prices.shed.shape == (3, 24)


def test_dangling_line_endpoint():
    doc = two_bus_doc(100.0)
    doc["lines"][0]["to"] = 99
    with pytest.raises(DanglingReferenceError, match="99"):
        load_case(doc)


def test_inverted_generator_bounds():
    doc = two_bus_doc(100.0)
    doc["generators"][0]["pmin_mw"] = 200.0
    with pytest.raises(CaseSchemaError, match="pmin_mw > pmax_mw"):
        load_case(doc)


def test_demand_series_length_mismatch():
    doc = two_bus_doc(100.0, t_count=3)
    doc["wind_farms"][0]["forecast_mw"] = [10.0, 20.0]
    with pytest.raises(DimensionMismatchError):
        load_case(doc)


def test_case_roundtrip(case9):
    net, prices = case9
    net2, prices2 = load_case(dump_case(net, prices))
    assert net2.n_nodes == net.n_nodes
    assert np.array_equal(net2.forecast(), net.forecast())
    assert np.array_equal(net2.demand(), net.demand())
    assert np.array_equal(prices2.shed, prices.shed)
    assert json.dumps(dump_case(net2, prices2), sort_keys=True) == json.dumps(
        dump_case(net, prices), sort_keys=True
    )


def test_row_column_tally(two_bus):
    net, prices = two_bus(100.0, t_count=3)
    uc = UcSchedule(on=np.ones((1, 3), dtype=np.int8))
    lp = assemble_recourse_lp(net, uc, prices, np.zeros((1, 3)))
    assert (lp.n_rows, lp.n_vars) == recourse_tally(net)
    # closed form: 2GT + 2G(T-1) + 2LT + 3NT + 2T + JT + MT, (G+N+M+J)T
    assert recourse_tally(net) == (6 + 4 + 6 + 18 + 6 + 3 + 3, (1 + 2 + 1 + 1) * 3)


def test_all_off_forces_zero_output(two_bus):
    net, prices = two_bus(100.0)
    uc = UcSchedule(on=np.zeros((1, 1), dtype=np.int8))
    sol = evaluate_scenario(net, uc, prices, np.zeros((1, 1)))
    assert sol.p[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert sol.shedding[0, 0] == pytest.approx(80.0)


def test_shutdown_ramp_relaxation(two_bus):
    net, prices = two_bus(100.0, t_count=3)
    uc = UcSchedule(on=np.array([[1, 0, 1]], dtype=np.int8))
    lp = assemble_recourse_lp(net, uc, prices, np.zeros((1, 3)))
    i = lp.row_names.index("ramp_dn[0,0]")
    assert lp.rhs[i] == pytest.approx(100.0)  # full capacity when shutting down
    i = lp.row_names.index("ramp_up[0,1]")
    assert lp.rhs[i] == pytest.approx(100.0)  # and when starting up


def test_ample_capacity_no_emergency(two_bus):
    net, prices = two_bus(100.0)
    uc = UcSchedule(on=np.ones((1, 1), dtype=np.int8))
    sol = evaluate_scenario(net, uc, prices, np.zeros((1, 1)))
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert sol.p[0, 0] == pytest.approx(80.0)


def test_capacity_shortfall_priced_shed(two_bus):
    net, prices = two_bus(60.0)
    uc = UcSchedule(on=np.ones((1, 1), dtype=np.int8))
    sol = evaluate_scenario(net, uc, prices, np.zeros((1, 1)))
    assert sol.objective == pytest.approx(20.0 * 1000.0)
    assert sol.shedding[0, 0] == pytest.approx(20.0)


def test_fixture_forecast_is_absorbed(case9, uc9):
    net, prices = case9
    sol = evaluate_scenario(net, uc9, prices, net.forecast())
    assert sol.objective == pytest.approx(0.0, abs=1e-6)
    # hand-checkable dispatch: total generation equals net demand
    total_gen = sol.p.sum(axis=0)
    net_load = net.demand().sum(axis=0) - net.forecast().sum(axis=0)
    assert np.allclose(total_gen, net_load, atol=1e-6)


def test_nodal_balance_residual(case9, uc9):
    net, prices = case9
    wind = np.minimum(net.forecast() * 1.3, net.capacities()[:, None])
    sol = evaluate_scenario(net, uc9, prices, wind)
    theta = sol.theta
    for t in range(0, net.n_periods, 7):
        inj = np.zeros(net.n_nodes)
        for g, gen in enumerate(net.generators):
            inj[gen.bus] += sol.p[g, t]
        for m, farm in enumerate(net.wind_farms):
            inj[farm.bus] += wind[m, t] - sol.curtailment[m, t]
        for j, load in enumerate(net.loads):
            inj[load.bus] -= load.demand[t] - sol.shedding[j, t]
        for line in net.lines:
            flow = net.base_mva * line.susceptance_pu * (
                theta[line.from_bus, t] - theta[line.to_bus, t]
            )
            inj[line.from_bus] -= flow
            inj[line.to_bus] += flow
        assert np.abs(inj).max() <= 1e-6


def test_monotone_in_capacity(two_bus):
    """Raising generation capacity weakly decreases the emergency cost."""
    costs = []
    for cap in (50.0, 60.0, 75.0, 120.0):
        net, prices = two_bus(cap)
        uc = UcSchedule(on=np.ones((1, 1), dtype=np.int8))
        costs.append(evaluate_scenario(net, uc, prices, np.zeros((1, 1))).objective)
    assert all(b <= a + 1e-9 for a, b in zip(costs, costs[1:]))


def test_wind_out_of_range_rejected(two_bus):
    net, prices = two_bus(100.0)
    uc = UcSchedule(on=np.ones((1, 1), dtype=np.int8))
    with pytest.raises(MalformedProblemError):
        evaluate_scenario(net, uc, prices, np.array([[999.0]]))
    with pytest.raises(DimensionMismatchError):
        evaluate_scenario(net, uc, prices, np.zeros((1, 2)))


def test_uc_csv_roundtrip(tmp_path, case9, uc9):
    net, _ = case9
    path = tmp_path / "uc.csv"
    uc9.write_csv(path)
    back = UcSchedule.read_csv(path, net)
    assert np.array_equal(back.on, uc9.on)
