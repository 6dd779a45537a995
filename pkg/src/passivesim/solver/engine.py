"""Coupled conduction / zone-air / airflow time stepping.

All wall nodes and zone air nodes form one linear system per time step,
advanced with backward Euler. The wall block only changes with the
exterior film coefficient, so it is factorised once per distinct wind
speed and the zone air nodes are eliminated through a small Schur
complement. Airflow is solved first at each step from the current air
temperatures, then enters the air balances as implicit enthalpy terms.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .. import comfort
from ..building import BuildingModel, validate
from ..errors import InputError, SingularSystemError
from ..weather import (TypicalSequence, WeatherSeries, direct_normal, extraterrestrial_normal,
                       solar_angles, tilted_from_normal)
from .airflow import AirflowNetwork
from .config import SimConfig
from .gains import DIFFUSE_FACTOR, Face, incidence_factor, zone_shares
from .grid import discretize

AIR_CP = 1005.0        # J/(kg K)
AIR_RHO = 1.2          # kg/m3, for air capacity and air change rates
GROUND_CONTACT = 1e3   # W/(m2 K), outer floor face to the fixed ground temperature

RESULT_HEADER = "timestamp,zone,t_air_c,t_mrt_c,t_res_c,ach"


@dataclass
class SimState:
    wall: np.ndarray       # every wall node, see ThermalNetwork.surface_slice
    air: np.ndarray        # zone air temperatures
    flows: np.ndarray      # kg/s per opening
    pressures: np.ndarray  # zone reference pressures, Pa

    def copy(self) -> "SimState":
        return SimState(self.wall.copy(), self.air.copy(), self.flows.copy(),
                        self.pressures.copy())


@dataclass(frozen=True)
class WeatherInstant:
    """Boundary conditions at the end of one time step.

    ``sky_clearness`` scales the sky-temperature depression (0 = overcast).
    """

    time: datetime
    dry_bulb: float
    global_horizontal: float = 0.0
    diffuse_horizontal: float = 0.0
    wind_speed: float = 0.0
    wind_direction: float = 0.0
    sky_clearness: float = 0.0


@dataclass
class _Forcing:
    """Per-step boundary data, rows are time steps."""

    t_ext: np.ndarray
    wind: np.ndarray
    wind_dir: np.ndarray
    h_ext: np.ndarray
    q_wall: np.ndarray   # (steps, n_nodes) W
    q_air: np.ndarray    # (steps, n_zones) W, excludes enthalpy terms
    transmitted: np.ndarray  # (steps, n_zones) W through glazing


class ThermalNetwork:
    """The assembled thermal model of one building under one configuration."""

    def __init__(self, model: BuildingModel, config: Optional[SimConfig] = None):
        self.model = model
        self.config = config or SimConfig()
        cfg = self.config
        self.zone_names = model.zone_names
        zidx = {n: i for i, n in enumerate(self.zone_names)}
        self.n_zones = nz = len(self.zone_names)
        self.airflow = AirflowNetwork(model)

        self.grids = {}
        self.surface_slice = {}
        self.face_node = {}
        caps, rows, cols, vals = [], [], [], []
        n = 0
        for z, s in model.surfaces():
            if s.net_area <= 0:
                continue
            g = discretize(s.construction, cfg.max_node_thickness)
            self.grids[s.name] = g
            self.surface_slice[s.name] = slice(n, n + g.n_nodes)
            self.face_node[Face(s.name, "outer")] = n
            self.face_node[Face(s.name, "inner")] = n + g.n_nodes - 1
            caps.append(g.capacities * s.net_area)
            for k, cond in enumerate(g.conductances):
                gc = cond * s.net_area
                i, j = n + k, n + k + 1
                rows += [i, j, i, j]
                cols += [i, j, j, i]
                vals += [gc, gc, -gc, -gc]
            n += g.n_nodes
        self.n_nodes = n
        self.capacity = np.concatenate(caps) if caps else np.zeros(0)

        # faces seen from inside each zone: convection to air, radiation to the zone MRT
        self.zone_faces = [[] for _ in range(nz)]
        for z, s in model.surfaces():
            if s.net_area <= 0:
                continue
            self.zone_faces[zidx[z.name]].append((self.face_node[Face(s.name, "inner")], s.net_area))
            if s.boundary.kind == "zone":
                self.zone_faces[zidx[s.boundary.zone]].append(
                    (self.face_node[Face(s.name, "outer")], s.net_area))
        h_ci, h_r = cfg.h_conv_interior, cfg.h_rad_linearized
        self.coupling = np.zeros((n, nz))  # W/K between face node and zone air
        for zi, faces in enumerate(self.zone_faces):
            a_tot = sum(a for _, a in faces)
            for node, a in faces:
                self.coupling[node, zi] += h_ci * a
                rows.append(node); cols.append(node); vals.append(h_ci * a)
                # linearised exchange with the area-weighted mean surface temperature
                for node2, a2 in faces:
                    rows.append(node); cols.append(node2)
                    vals.append(h_r * a * ((1.0 if node2 == node else 0.0) - a2 / a_tot))

        # exterior faces
        ext_nodes, ext_area, ext_alpha, ext_eps, ext_tilt, ext_az = [], [], [], [], [], []
        ground_nodes, ground_area = [], []
        glz_zone, glz_tilt, glz_az, glz_gain = [], [], [], []
        self.glazing_ua = np.zeros(nz)
        for z, s in model.surfaces():
            kind = s.boundary.kind
            if s.net_area > 0 and kind == "exterior":
                ext_nodes.append(self.face_node[Face(s.name, "outer")])
                ext_area.append(s.net_area)
                ext_alpha.append(s.construction.exterior_absorptance)
                ext_eps.append(s.construction.exterior_emissivity)
                ext_tilt.append(s.tilt)
                ext_az.append(s.azimuth)
            elif s.net_area > 0 and kind == "ground":
                ground_nodes.append(self.face_node[Face(s.name, "outer")])
                ground_area.append(s.net_area)
            if s.glazings and kind == "exterior":
                glz_zone.append(zidx[z.name])
                glz_tilt.append(s.tilt)
                glz_az.append(s.azimuth)
                glz_gain.append(sum(g.area * g.shgc for g in s.glazings))
                self.glazing_ua[zidx[z.name]] += sum(g.area * g.u_value for g in s.glazings)
        self.ext_nodes = np.array(ext_nodes, dtype=int)
        self.ext_area = np.array(ext_area)
        self.ext_alpha = np.array(ext_alpha)
        self.ext_eps = np.array(ext_eps)
        self.ext_tilt = np.array(ext_tilt)
        self.ext_az = np.array(ext_az)
        self.ext_sky_view = (1.0 + np.cos(np.radians(self.ext_tilt))) / 2.0
        self.ground_nodes = np.array(ground_nodes, dtype=int)
        self.ground_area = np.array(ground_area)
        self.glz_zone = np.array(glz_zone, dtype=int)
        self.glz_tilt = np.array(glz_tilt)
        self.glz_az = np.array(glz_az)
        self.glz_gain = np.array(glz_gain)

        for node, a in zip(ground_nodes, ground_area):
            rows.append(node); cols.append(node); vals.append(GROUND_CONTACT * a)
        self._base = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
        ext_diag = np.zeros(n)
        ext_diag[self.ext_nodes] = self.ext_area
        self._ext_diag = ext_diag

        # transmitted solar -> interior faces
        self.solar_dist = np.zeros((n, nz))
        self.solar_escape = np.zeros(nz)
        for zi, shares in enumerate(zone_shares(model, cfg.solar_to_floor_fraction)):
            dist, esc = shares.distribution()
            for face, frac in dist.items():
                self.solar_dist[self.face_node[face], zi] += frac
            self.solar_escape[zi] = esc

        self.air_capacity = np.array([AIR_RHO * AIR_CP * z.volume for z in model.zones])
        self.volumes = np.array([z.volume for z in model.zones])
        self.mrt_nodes = [np.array([nd for nd, _ in f], dtype=int) for f in self.zone_faces]
        self.mrt_areas = [np.array([a for _, a in f]) for f in self.zone_faces]
        self._factors = {}

    # -- linear algebra ------------------------------------------------------

    def _factor(self, h_ext: float, dt: Optional[float]):
        key = (float(h_ext), dt)
        hit = self._factors.get(key)
        if hit is not None:
            return hit
        diag = h_ext * self._ext_diag
        if dt is not None:
            diag = diag + self.capacity / dt
        m = (self._base + sp.diags(diag, format="csc")).tocsc()
        try:
            lu = splu(m)
        except RuntimeError as exc:
            raise SingularSystemError(f"wall system is singular: {exc}") from None
        x = lu.solve(self.coupling) if self.n_zones else np.zeros((self.n_nodes, 0))
        schur = self.coupling.T @ x
        if len(self._factors) > 64:
            self._factors.clear()
        self._factors[key] = (lu, x, schur)
        return lu, x, schur

    def _air_matrix(self, dt: Optional[float], inflow: np.ndarray):
        nz = self.n_zones
        diag = self.coupling.sum(axis=0) + self.glazing_ua + AIR_CP * inflow.sum(axis=1)
        if dt is not None:
            diag = diag + self.air_capacity / dt
        return np.diag(diag) - AIR_CP * inflow[:, :nz]

    def _solve(self, dt, h_ext, rhs_wall, rhs_air, inflow):
        lu, x, schur = self._factor(h_ext, dt)
        y = lu.solve(rhs_wall)
        a = self._air_matrix(dt, inflow) - schur
        b = rhs_air + self.coupling.T @ y
        try:
            t_air = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            raise SingularSystemError("zone air system is singular") from None
        return y + x @ t_air, t_air

    # -- forcing -------------------------------------------------------------

    def forcing(self, times: Sequence[datetime], t_ext, dni, dhi, wind, wind_dir,
                sky_clearness, zone_gains=None) -> _Forcing:
        """Boundary terms for each instant of ``times``.

        Irradiance is given as direct normal ``dni`` and diffuse horizontal
        ``dhi``; both vary smoothly between hourly records, unlike a beam
        rebuilt from global irradiance at every sub-step.
        """
        cfg = self.config
        site = self.model.site
        t_ext = np.asarray(t_ext, dtype=float)
        dni = np.asarray(dni, dtype=float)
        dhi = np.asarray(dhi, dtype=float)
        wind = np.asarray(wind, dtype=float)
        wind_dir = np.asarray(wind_dir, dtype=float)
        sky_clearness = np.broadcast_to(np.asarray(sky_clearness, dtype=float), t_ext.shape)
        steps = len(t_ext)
        doy = np.array([t.timetuple().tm_yday for t in times], dtype=float)
        hour = np.array([t.hour + t.minute / 60 + t.second / 3600 for t in times])
        alt, az = solar_angles(site, doy, hour)
        h_ext = cfg.h_exterior(wind)
        albedo = site.ground_albedo

        q_wall = np.zeros((steps, self.n_nodes))
        for k, node in enumerate(self.ext_nodes):
            beam, sky, ground, _ = tilted_from_normal(dni, dhi, alt, az, self.ext_tilt[k],
                                                      self.ext_az[k], albedo)
            irr = beam + sky + ground
            sky_term = (self.ext_eps[k] * self.ext_sky_view[k] * cfg.sky_temp_depression
                        * sky_clearness)
            t_solair = t_ext + self.ext_alpha[k] * irr / h_ext - sky_term
            q_wall[:, node] += self.ext_area[k] * h_ext * t_solair
        for node, a in zip(self.ground_nodes, self.ground_area):
            q_wall[:, node] += GROUND_CONTACT * a * cfg.ground_temperature

        transmitted = np.zeros((steps, self.n_zones))
        for k, zi in enumerate(self.glz_zone):
            beam, sky, ground, cos_inc = tilted_from_normal(dni, dhi, alt, az, self.glz_tilt[k],
                                                            self.glz_az[k], albedo)
            transmitted[:, zi] += self.glz_gain[k] * (incidence_factor(cos_inc) * beam
                                                      + DIFFUSE_FACTOR * (sky + ground))
        q_wall += transmitted @ self.solar_dist.T
        q_air = t_ext[:, None] * self.glazing_ua[None, :]
        if zone_gains is not None:
            q_air = q_air + np.broadcast_to(np.asarray(zone_gains, dtype=float), q_air.shape)
        return _Forcing(t_ext, wind, wind_dir, h_ext, q_wall, q_air, transmitted)

    # -- states --------------------------------------------------------------

    def uniform_state(self, temperature: float) -> SimState:
        return SimState(np.full(self.n_nodes, float(temperature)),
                        np.full(self.n_zones, float(temperature)),
                        np.zeros(self.airflow.n_openings), np.zeros(self.n_zones))

    def steady_state(self, f: _Forcing) -> SimState:
        """Steady solution under the time-averaged forcing, used to start warm-up."""
        t_mean = float(f.t_ext.mean())
        state = self.uniform_state(t_mean)
        h_ext = float(f.h_ext.mean())
        q_wall = f.q_wall.mean(axis=0)
        q_air = f.q_air.mean(axis=0)
        wind, wdir = float(f.wind.mean()), float(f.wind_dir[0]) if len(f.wind_dir) else 0.0
        try:
            for _ in range(3):
                sol = self.airflow.solve(state.air, t_mean, wind, wdir, state.pressures)
                inflow = self.airflow.inflow_matrix(sol.flows)
                rhs_air = q_air + AIR_CP * inflow[:, -1] * t_mean
                wall, air = self._solve(None, h_ext, q_wall, rhs_air, inflow)
                state = SimState(wall, air, sol.flows, sol.pressures)
        except SingularSystemError:
            return self.uniform_state(t_mean)
        if not (np.all(np.isfinite(state.wall)) and np.all(np.isfinite(state.air))):
            return self.uniform_state(t_mean)
        return state

    def advance(self, state: SimState, f: _Forcing, k: int, dt: Optional[float] = None) -> SimState:
        """One backward-Euler step using row ``k`` of the forcing."""
        dt = dt or self.config.dt
        t_ext = f.t_ext[k]
        sol = self.airflow.solve(state.air, t_ext, f.wind[k], f.wind_dir[k], state.pressures)
        inflow = self.airflow.inflow_matrix(sol.flows)
        rhs_wall = self.capacity / dt * state.wall + f.q_wall[k]
        rhs_air = (self.air_capacity / dt * state.air + f.q_air[k]
                   + AIR_CP * inflow[:, -1] * t_ext)
        wall, air = self._solve(dt, f.h_ext[k], rhs_wall, rhs_air, inflow)
        return SimState(wall, air, sol.flows, sol.pressures)

    def instant_forcing(self, instant: WeatherInstant, zone_gains=None) -> _Forcing:
        """Single-row forcing for one weather instant."""
        t = instant.time
        alt, _ = solar_angles(self.model.site, t.timetuple().tm_yday,
                              t.hour + t.minute / 60 + t.second / 3600)
        dni = direct_normal(instant.global_horizontal, instant.diffuse_horizontal, alt)
        return self.forcing([t], [instant.dry_bulb], [float(dni)], [instant.diffuse_horizontal],
                            [instant.wind_speed], [instant.wind_direction],
                            [instant.sky_clearness], zone_gains)

    def boundary_heat_flow(self, state: SimState, f: _Forcing, k: int) -> float:
        """Net power (W) entering the wall and air nodes from outside the
        system at ``state``: exterior films, ground contact, glazing
        conduction, absorbed solar, injected gains and air exchange with
        the exterior. Under backward Euler this equals the stored energy
        change of a step divided by dt when evaluated at the step's end.
        """
        t_ext = f.t_ext[k]
        wall, air = state.wall, state.air
        q = f.q_wall[k].sum() - f.h_ext[k] * (self._ext_diag * wall).sum()
        q -= (GROUND_CONTACT * self.ground_area * wall[self.ground_nodes]).sum()
        q += f.q_air[k].sum() - (self.glazing_ua * air).sum()
        inflow = self.airflow.inflow_matrix(state.flows)
        t_nodes = np.append(air, t_ext)
        q += AIR_CP * (inflow @ t_nodes - inflow.sum(axis=1) * air).sum()
        return float(q)

    def stored_energy(self, state: SimState) -> float:
        """Heat content (J) relative to 0 C of all capacitive nodes."""
        return float(self.capacity @ state.wall + self.air_capacity @ state.air)

    def mean_radiant(self, wall: np.ndarray) -> np.ndarray:
        return np.array([comfort.mean_radiant_temperature(a, wall[nodes])
                         for nodes, a in zip(self.mrt_nodes, self.mrt_areas)])

    def air_changes(self, flows: np.ndarray) -> np.ndarray:
        inflow = self.airflow.inflow_matrix(flows).sum(axis=1)
        return inflow * 3600.0 / (AIR_RHO * self.volumes)


def step(network: ThermalNetwork, state: SimState, instant: WeatherInstant,
         zone_gains=None) -> SimState:
    """Advance ``state`` by one ``network.config.dt`` ending at ``instant``.

    ``zone_gains`` optionally injects extra convective power (W) per zone.
    """
    return network.advance(state, network.instant_forcing(instant, zone_gains), 0)


# ---------------------------------------------------------------------------
# Results and the simulation driver
# ---------------------------------------------------------------------------

@dataclass
class ResultSeries:
    timestamps: list
    zones: list
    t_air: np.ndarray   # (hours, zones)
    t_mrt: np.ndarray
    t_res: np.ndarray
    ach: np.ndarray
    warmup_days: int = 0
    max_airflow_residual: float = 0.0

    def __len__(self):
        return len(self.timestamps)

    def column(self, name: str, zone: str) -> np.ndarray:
        return getattr(self, name)[:, self.zones.index(zone)]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(RESULT_HEADER + "\n")
        for i, ts in enumerate(self.timestamps):
            stamp = ts.strftime("%Y-%m-%dT%H:00")
            for j, z in enumerate(self.zones):
                out.write(f"{stamp},{z},{self.t_air[i, j]:.4f},{self.t_mrt[i, j]:.4f},"
                          f"{self.t_res[i, j]:.4f},{self.ach[i, j]:.4f}\n")
        return out.getvalue()


def _daily_clearness(series: WeatherSeries, site) -> np.ndarray:
    """Clearness index of each record's calendar day (0 when the sun never rises)."""
    doy = np.array([t.timetuple().tm_yday for t in series.timestamps], dtype=float)
    hour = np.array([t.hour for t in series.timestamps], dtype=float)
    alt, _ = solar_angles(site, doy, hour)
    e0 = extraterrestrial_normal(doy) * np.maximum(np.sin(np.radians(alt)), 0.0)
    days = np.array([t.toordinal() for t in series.timestamps])
    out = np.zeros(len(days))
    for d in np.unique(days):
        sel = days == d
        denom = e0[sel].sum()
        out[sel] = min(1.0, series.ghi[sel].sum() / denom) if denom > 0 else 0.0
    return out


class _Schedule:
    """Interpolated sub-hourly boundary conditions for a list of hour indices.

    Hour ``i`` covers the interval (t_i - 1 h, t_i]; its first substep
    interpolates from record ``i - 1`` (or the last record of the first day
    for ``i == 0``, which makes day 1 periodic).
    """

    def __init__(self, series: WeatherSeries, site, clearness: np.ndarray, steps_per_hour: int):
        self.series = series
        self.clearness = clearness
        doy = np.array([t.timetuple().tm_yday for t in series.timestamps], dtype=float)
        hour = np.array([t.hour for t in series.timestamps], dtype=float)
        alt, _ = solar_angles(site, doy, hour)
        self.dni = direct_normal(series.ghi, series.dhi, alt)
        self.n = steps_per_hour
        self.cycle = min(24, len(series))

    def build(self, network: ThermalNetwork, hours: Sequence[int]) -> _Forcing:
        s = self.series
        n = self.n
        frac = np.arange(1, n + 1) / n
        idx = np.repeat(np.asarray(hours, dtype=int), n)
        prev = np.where(idx > 0, idx - 1, self.cycle - 1)
        w = np.tile(frac, len(hours))

        def lerp(arr):
            return (1 - w) * arr[prev] + w * arr[idx]

        times = []
        for i in hours:
            t_end = s.timestamps[i]
            for k in range(1, n + 1):
                times.append(t_end - timedelta(seconds=3600.0 * (1 - k / n)))
        return network.forcing(times, lerp(s.dry_bulb), lerp(self.dni), lerp(s.dhi),
                               lerp(s.wind_speed), s.wind_direction[idx], self.clearness[idx])


def _run_hours(network: ThermalNetwork, state: SimState, forcing: _Forcing, n_hours: int,
               steps_per_hour: int, record: bool):
    nz = network.n_zones
    t_air = np.zeros((n_hours, nz))
    t_mrt = np.zeros((n_hours, nz))
    ach = np.zeros((n_hours, nz))
    worst = 0.0
    k = 0
    for h in range(n_hours):
        acc_air = np.zeros(nz)
        acc_wall = np.zeros(network.n_nodes) if record else None
        acc_ach = np.zeros(nz)
        for _ in range(steps_per_hour):
            previous = state
            state = network.advance(state, forcing, k)
            k += 1
            # trapezoidal mean over the step, exact for linear change within it
            acc_air += 0.5 * (previous.air + state.air)
            if record:
                acc_wall += 0.5 * (previous.wall + state.wall)
                acc_ach += network.air_changes(state.flows)
                res = network.airflow.incidence @ state.flows
                worst = max(worst, float(np.abs(res).max()) if nz else 0.0)
        t_air[h] = acc_air / steps_per_hour
        if record:
            t_mrt[h] = network.mean_radiant(acc_wall / steps_per_hour)
            ach[h] = acc_ach / steps_per_hour
    return state, t_air, t_mrt, ach, worst


def simulate(model: BuildingModel, weather: Union[WeatherSeries, TypicalSequence],
             config: Optional[SimConfig] = None, *, network: Optional[ThermalNetwork] = None,
             initial_state: Optional[SimState] = None) -> ResultSeries:
    """Run a full simulation and return hourly per-zone results.

    Day 1 is repeated until the hourly air-temperature profile of every
    zone changes by less than ``warmup_tol`` between repeats (at most
    ``warmup_max_days`` repeats), starting from the steady solution under
    day-1 mean conditions. The whole sequence is then integrated and
    sub-hourly steps are averaged into the hour ending at each timestamp.
    """
    config = config or SimConfig()
    if isinstance(weather, TypicalSequence):
        weather = weather.as_series()
    problems = validate(model)
    if problems:
        raise InputError("invalid building model: " + "; ".join(problems))
    if weather.site is not None and not weather.site.same_location(model.site):
        raise InputError("weather site does not match the building site")
    net = network or ThermalNetwork(model, config)
    n = config.steps_per_hour
    sched = _Schedule(weather, model.site, _daily_clearness(weather, model.site), n)

    day1 = list(range(sched.cycle))
    f_day1 = sched.build(net, day1)
    state = initial_state.copy() if initial_state is not None else net.steady_state(f_day1)
    previous = None
    warmup = 0
    for _ in range(config.warmup_max_days):
        state, profile, _, _, _ = _run_hours(net, state, f_day1, len(day1), n, record=False)
        warmup += 1
        if previous is not None and np.abs(profile - previous).max() < config.warmup_tol:
            break
        previous = profile

    f_all = sched.build(net, range(len(weather)))
    state, t_air, t_mrt, ach, worst = _run_hours(net, state, f_all, len(weather), n, record=True)
    t_res = comfort.resultant_from_mrt(t_air, t_mrt)
    return ResultSeries(list(weather.timestamps), list(net.zone_names), t_air, t_mrt, t_res,
                        ach, warmup, worst)
