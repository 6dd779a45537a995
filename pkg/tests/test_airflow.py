import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import two_opening_stack_flow
from passivesim import building as b
from passivesim.errors import ConvergenceError
from passivesim.solver import AirflowNetwork, solve_airflow
from passivesim.solver.airflow import MASS_TOL, air_density
from passivesim.weather import SiteInfo


def _box(openings):
    floor = b.Surface("floor", "floor", 10.0, 180.0, 0.0, b.FLOOR, b.Boundary.GROUND)
    zone = b.Zone("room", 26.0, (floor,), tuple(openings), "floor")
    return b.BuildingModel(SiteInfo(), (zone,))


def _stack_model(c=0.01, n=0.65):
    return _box([b.Opening("low", ("room", b.EXTERIOR), c, n, 0.1, 0.0),
                 b.Opening("high", ("room", b.EXTERIOR), c, n, 2.0, 0.0)])


def test_isothermal_no_wind_gives_zero_flow(house):
    flows = solve_airflow(house, [18.0] * 6, 18.0)
    assert np.all(flows == 0)


def test_two_opening_stack_matches_closed_form():
    c, n = 0.01, 0.65
    sol = AirflowNetwork(_stack_model(c, n)).solve([20.0], 10.0)
    low, high = sol.flows
    expected = two_opening_stack_flow(c, n, air_density(20.0), air_density(10.0), 1.9)
    # positive flow runs room -> exterior: warm air leaves high, cold air enters low
    assert low < 0 < high
    assert abs(low) == pytest.approx(high, rel=1e-6)
    assert high == pytest.approx(expected, rel=0.01)
    assert abs(sol.residuals).max() < MASS_TOL


def test_flows_linear_in_coefficient():
    a = AirflowNetwork(_stack_model(0.01)).solve([20.0], 10.0).flows
    d = AirflowNetwork(_stack_model(0.02)).solve([20.0], 10.0).flows
    assert np.allclose(d, 2 * a, rtol=1e-6)


def test_house_mass_balance_with_wind(house):
    net = AirflowNetwork(house)
    sol = net.solve(np.linspace(14, 19, 6), 8.0, wind_speed=4.0, wind_direction=120.0)
    assert np.abs(sol.residuals).max() < MASS_TOL
    assert np.any(sol.flows != 0)


def test_inflow_matrix_conserves_mass(house):
    net = AirflowNetwork(house)
    sol = net.solve(np.linspace(14, 19, 6), 8.0, wind_speed=3.0, wind_direction=40.0)
    inflow = net.inflow_matrix(sol.flows)
    assert inflow.shape == (6, 7)
    assert np.all(inflow >= 0)
    # what flows into each zone equals what leaves it through its openings
    outflow = np.zeros(7)
    np.add.at(outflow, net.a[sol.flows > 0], sol.flows[sol.flows > 0])
    np.add.at(outflow, net.b[sol.flows < 0], -sol.flows[sol.flows < 0])
    assert np.allclose(inflow.sum(axis=1), outflow[:6], rtol=0, atol=1e-9)


def test_nonconvergence_carries_residuals(monkeypatch):
    from passivesim.solver import airflow
    monkeypatch.setattr(airflow, "MAX_ITER", 0)
    with pytest.raises(ConvergenceError) as info:
        AirflowNetwork(_stack_model()).solve([25.0], 0.0)
    assert info.value.residuals is not None and len(info.value.residuals) == 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 30), min_size=6, max_size=6), st.floats(-5, 30),
       st.floats(0, 12), st.floats(0, 359))
def test_mass_residual_property(temps, t_ext, wind, wdir):
    sol = AirflowNetwork(b.typical_house()).solve(temps, t_ext, wind, wdir)
    assert np.abs(sol.residuals).max() < MASS_TOL
