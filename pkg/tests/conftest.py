import json
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from windadmit.grid import Network, PriceSchedule, UcSchedule, load_case, slice_horizon

FIXTURE_DIR = Path(resources.files("windadmit") / "data")


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / name


@pytest.fixture(scope="session")
def case9():
    """The bundled 9-bus case (network, prices)."""
    return load_case(fixture_path("case_ieee9.json"))


@pytest.fixture(scope="session")
def uc9(case9):
    net, _ = case9
    return UcSchedule.read_csv(fixture_path("uc_r005.csv"), net)


@pytest.fixture(scope="session")
def case9_t6(case9, uc9):
    net, prices = case9
    return slice_horizon(net, prices, uc9, 6)


@pytest.fixture(scope="session")
def case9_t12(case9, uc9):
    net, prices = case9
    return slice_horizon(net, prices, uc9, 12)


def two_bus_doc(gen_cap: float, t_count: int = 1, forecast: float = 30.0,
                wind_cap: float = 50.0, load: float = 80.0, ramp: float = 100.0,
                pmin: float = 0.0) -> dict:
    """Tiny transport case: one generator and wind at bus 1, load at bus 2."""
    return {
        "base_mva": 100,
        "nodes": 2,
        "ref_node": 1,
        "lines": [{"from": 1, "to": 2, "susceptance_pu": 10.0, "capacity_mw": 500.0}],
        "generators": [{"bus": 1, "pmin_mw": pmin, "pmax_mw": gen_cap,
                        "ramp_up_mw": ramp, "ramp_dn_mw": ramp, "cost_per_mwh": 20.0}],
        "loads": [{"bus": 2, "demand_mw": [load] * t_count}],
        "wind_farms": [{"bus": 1, "capacity_mw": wind_cap,
                        "forecast_mw": [forecast] * t_count}],
        "prices": {"curtail": [5.0], "shed": [1000.0],
                   "reg_up": [100.0] * t_count, "reg_dn": [20.0] * t_count},
    }


@pytest.fixture
def two_bus():
    def make(gen_cap, **kw):
        return load_case(two_bus_doc(gen_cap, **kw))
    return make
