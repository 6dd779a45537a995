from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rc_step_response
from passivesim import building as b
from passivesim.errors import InputError
from passivesim.solver import SimConfig, ThermalNetwork, WeatherInstant, simulate, step
from passivesim.solver.engine import AIR_CP, AIR_RHO, RESULT_HEADER
from passivesim.weather import SiteInfo, WeatherRecord, WeatherSeries, synth_weather

NIGHT = datetime(2023, 6, 18, 0)
LIGHT = b.Material("light", 0.5, 1.0, 1.0, resistive_only=True)


def _single_zone(boundary, area=20.0, volume=50.0, layer_thickness=0.05):
    cons = b.Construction((b.Layer(LIGHT, layer_thickness),))
    wall = b.Surface("wall", "wall", area, 90.0, 0.0, cons, boundary)
    zone = b.Zone("room", volume, (wall,), (), "")
    return b.BuildingModel(SiteInfo(), (zone,))


def _constant_weather(temp, hours, ghi=0.0, wind=0.0):
    recs = [WeatherRecord(NIGHT + timedelta(hours=h), temp, 50.0, ghi, 0.25 * ghi, wind, 0.0)
            for h in range(hours)]
    return WeatherSeries(None, recs)


# ---------------------------------------------------------------- single steps

def test_fixed_point_at_20(house):
    cfg = SimConfig(ground_temperature=20.0)
    net = ThermalNetwork(house, cfg)
    state = net.uniform_state(20.0)
    new = step(net, state, WeatherInstant(NIGHT, 20.0))
    assert np.allclose(new.wall, 20.0, atol=1e-10)
    assert np.allclose(new.air, 20.0, atol=1e-10)
    assert np.all(new.flows == 0)


def test_rc_step_response():
    # a capacity-free envelope leaves the zone air as the only capacity
    cfg = SimConfig(dt=60.0)
    area, volume = 20.0, 300.0
    net = ThermalNetwork(_single_zone(b.Boundary.EXTERIOR, area, volume), cfg)
    u = 1.0 / (1.0 / cfg.h_conv_interior + 0.05 / 0.5 + 1.0 / cfg.h_conv_exterior)
    tau = AIR_RHO * AIR_CP * volume / (u * area)
    state = net.uniform_state(20.0)
    times, temps = [], []
    for k in range(1, int(3 * tau / 60) + 1):
        state = step(net, state, WeatherInstant(NIGHT, 0.0))
        times.append(60.0 * k)
        temps.append(state.air[0])
    exact = np.array([rc_step_response(t, tau, 20.0, 0.0) for t in times])
    assert np.abs(np.array(temps) - exact).max() / 20.0 < 0.01
    # the time to reach 1/e of the step agrees with tau within 1 %
    t_e = np.interp(1.0, -np.log(np.array(temps) / 20.0), times)
    assert t_e == pytest.approx(tau, rel=0.01)


def test_adiabatic_ramp():
    cfg = SimConfig(dt=300.0)
    net = ThermalNetwork(_single_zone(b.Boundary.ADIABATIC), cfg)
    power = 500.0
    c_air = AIR_RHO * AIR_CP * 50.0
    state = net.uniform_state(15.0)
    temps = [15.0]
    for _ in range(12):
        state = step(net, state, WeatherInstant(NIGHT, -5.0), zone_gains=[power])
        temps.append(state.air[0])
    slope = np.diff(temps) / 300.0
    assert np.allclose(slope, power / c_air, rtol=0.01)


@settings(max_examples=15, deadline=None)
@given(st.floats(-5, 30), st.floats(0, 900), st.floats(0, 10), st.integers(0, 23),
       st.floats(5, 30))
def test_energy_bookkeeping(t_ext, ghi, wind, hour, t0):
    net = _network()
    state = net.uniform_state(t0)
    state.wall = state.wall + np.linspace(-2, 2, net.n_nodes)
    instant = WeatherInstant(datetime(2023, 6, 18, hour), t_ext, ghi, 0.25 * ghi, wind, 120.0, 0.7)
    f = net.instant_forcing(instant)
    new = net.advance(state, f, 0)
    stored = net.stored_energy(new) - net.stored_energy(state)
    inflow = net.boundary_heat_flow(new, f, 0) * net.config.dt
    assert stored == pytest.approx(inflow, rel=1e-6, abs=1e-6 * net.stored_energy(state))


_NET = {}


def _network():
    if "net" not in _NET:
        _NET["net"] = ThermalNetwork(b.typical_house(), SimConfig())
    return _NET["net"]


# ---------------------------------------------------------------- full runs

def test_isothermal_limit(house):
    cfg = SimConfig(ground_temperature=15.0)
    res = simulate(house, _constant_weather(15.0, 48), cfg)
    assert np.allclose(res.t_air, 15.0, atol=0.05)
    assert np.allclose(res.t_res, 15.0, atol=0.05)


def test_large_step_is_stable(house, design_week):
    coarse = simulate(house, design_week, SimConfig(dt=3600.0))
    fine = simulate(house, design_week, SimConfig(dt=600.0))
    assert np.all(np.isfinite(coarse.t_res))
    assert np.abs(coarse.t_res - fine.t_res).max() < 1.0
    # no sawtooth: hour-to-hour changes stay smooth
    assert np.abs(np.diff(coarse.t_res, 2, axis=0)).max() < 1.0


def test_result_series_shape_and_csv(house, design_week):
    res = simulate(house, design_week)
    assert res.t_res.shape == (168, 6)
    assert 1 <= res.warmup_days <= SimConfig().warmup_max_days
    assert res.max_airflow_residual < 1e-9
    lo = np.minimum(res.t_air, res.t_mrt) - 1e-12
    hi = np.maximum(res.t_air, res.t_mrt) + 1e-12
    assert np.all((lo <= res.t_res) & (res.t_res <= hi))
    text = res.to_csv()
    assert text.splitlines()[0] == RESULT_HEADER
    assert len(text.splitlines()) == 1 + 168 * 6
    assert np.array_equal(res.column("t_res", "kitchen"), res.t_res[:, 3])


def test_deterministic(house):
    w = synth_weather(SiteInfo(), 2, 5.6, 20.6, 0.7, 80, 2)
    assert simulate(house, w).to_csv() == simulate(house, w).to_csv()


def test_site_mismatch_rejected(house):
    w = synth_weather(SiteInfo(latitude=10.0), 1, 5, 15, 0.5, 80, 1)
    with pytest.raises(InputError, match="site"):
        simulate(house, w)


def test_invalid_model_rejected(house):
    broken = b.BuildingModel(house.site, house.zones[:1])  # bedroom1 refers to missing zones
    with pytest.raises(InputError):
        simulate(broken, _constant_weather(15.0, 24))


def test_config_validation():
    with pytest.raises(InputError):
        SimConfig(dt=700.0)
    with pytest.raises(InputError):
        SimConfig(h_conv_interior=0.0)
    with pytest.raises(InputError):
        SimConfig.from_dict({"dt": 600, "bogus": 1})
    cfg = SimConfig.from_json('{"simulation": {"dt": 300}}')
    assert cfg.dt == 300.0 and cfg.steps_per_hour == 12
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


_SWEEP_CM = (0, 5, 10, 15, 20, 25)


def _coldest_night(model, weather):
    from passivesim.comfort import NIGHT_HOURS
    res = simulate(model, weather)
    night = np.array([t.hour in NIGHT_HOURS for t in res.timestamps])
    return res.t_res[night].min(axis=0)


@pytest.mark.parametrize("material", [
    "straw",
    pytest.param("torchi", marks=pytest.mark.xfail(
        strict=True, reason="interior lining screens the zone from heat the brick stores by "
                            "day; beyond about 10 cm several zones lose up to 0.07 K")),
])
def test_insulation_never_lowers_coldest_night(material, house, design_week):
    def insulate(cm):
        if material == "straw":
            return b.add_roof_insulation(house, b.STRAW, cm / 100)
        return b.add_wall_insulation(house, b.TORCHI, cm / 100, "interior")

    minima = np.array([_coldest_night(insulate(cm), design_week) for cm in _SWEEP_CM])
    assert np.all(np.diff(minima, axis=0) >= -1e-9), np.round(minima, 3)
