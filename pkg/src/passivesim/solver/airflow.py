"""Pressure network for crack and door flows between zones and outdoors.

Each opening follows the power law ``m = C * sign(dP) * |dP|**n``. Node
pressures are referenced to the outdoor static pressure at ground level;
the pressure of a node at height ``z`` is ``P - rho * g * z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..building import EXTERIOR, BuildingModel
from ..errors import ConvergenceError, ModelError

GRAVITY = 9.81
P_ATM = 101325.0
R_AIR = 287.055
CP_WINDWARD = 0.6
CP_LEEWARD = -0.3

MAX_ITER = 100
MASS_TOL = 1e-9  # kg/s, per-zone residual
ARMIJO = 0.3  # line-search sufficient-decrease coefficient
_DERIV_FLOOR = 1e-10  # Pa, keeps the Jacobian finite at zero pressure difference


def air_density(t_celsius):
    return P_ATM / (R_AIR * (np.asarray(t_celsius, dtype=float) + 273.15))


@dataclass
class AirflowSolution:
    flows: np.ndarray      # kg/s per opening, positive from connects[0] to connects[1]
    pressures: np.ndarray  # Pa per zone
    residuals: np.ndarray  # kg/s net inflow per zone
    iterations: int


class AirflowNetwork:
    """Opening arrays compiled once from a model.

    Node index ``n_zones`` stands for the exterior.
    """

    def __init__(self, model: BuildingModel):
        self.zone_names = model.zone_names
        index = {name: i for i, name in enumerate(self.zone_names)}
        self.n_zones = len(self.zone_names)
        ext = self.n_zones
        openings = list(model.openings())
        self.opening_names = [o.name for o in openings]
        try:
            self.a = np.array([ext if o.connects[0] == EXTERIOR else index[o.connects[0]]
                               for o in openings], dtype=int)
            self.b = np.array([ext if o.connects[1] == EXTERIOR else index[o.connects[1]]
                               for o in openings], dtype=int)
        except KeyError as exc:
            raise ModelError(f"opening refers to unknown zone {exc}") from None
        self.c = np.array([o.flow_coefficient for o in openings], dtype=float)
        self.n = np.array([o.exponent for o in openings], dtype=float)
        self.height = np.array([o.height for o in openings], dtype=float)
        self.azimuth = np.array([np.nan if o.azimuth is None else o.azimuth
                                 for o in openings], dtype=float)
        # signed incidence: +1 where the opening's positive flow enters the zone
        inc = np.zeros((self.n_zones + 1, len(openings)))
        cols = np.arange(len(openings))
        inc[self.b, cols] += 1.0
        inc[self.a, cols] -= 1.0
        self.incidence = inc[:self.n_zones]
        connected = np.abs(self.incidence).sum(axis=1) > 0
        self.active = np.flatnonzero(connected)

    @property
    def n_openings(self) -> int:
        return len(self.c)

    def wind_pressure(self, exterior_temp, wind_speed, wind_direction):
        """Wind pressure on the exterior end of each opening (0 for internal ones)."""
        if wind_speed == 0:
            return np.zeros(self.n_openings)
        rho_o = air_density(exterior_temp)
        diff = np.abs((self.azimuth - wind_direction + 180.0) % 360.0 - 180.0)
        windward = diff < 90.0  # NaN azimuth (roof) compares False
        cp = np.where(windward, CP_WINDWARD, CP_LEEWARD)
        return cp * 0.5 * rho_o * wind_speed ** 2

    def driving_offsets(self, zone_air_temps, exterior_temp, wind_speed, wind_direction):
        """Part of each opening's pressure difference that does not depend on
        the zone reference pressures: stack terms plus wind."""
        rho = np.append(air_density(zone_air_temps), air_density(exterior_temp))
        stack = -(rho[self.a] - rho[self.b]) * GRAVITY * self.height
        pw = self.wind_pressure(exterior_temp, wind_speed, wind_direction)
        ext = self.n_zones
        return stack + np.where(self.a == ext, pw, 0.0) - np.where(self.b == ext, pw, 0.0)

    def flows_for(self, pressures, offsets):
        p = np.append(pressures, 0.0)
        dp = p[self.a] - p[self.b] + offsets
        return self.c * np.sign(dp) * np.abs(dp) ** self.n, dp

    def solve(self, zone_air_temps, exterior_temp, wind_speed=0.0, wind_direction=0.0,
              initial_pressures=None) -> AirflowSolution:
        offsets = self.driving_offsets(zone_air_temps, exterior_temp, wind_speed, wind_direction)
        p = (np.zeros(self.n_zones) if initial_pressures is None
             else np.array(initial_pressures, dtype=float))
        act = self.active
        inc = self.incidence[act]
        flows, dp = self.flows_for(p, offsets)
        res = inc @ flows
        norm = np.abs(res).max() if len(act) else 0.0
        it = 0
        while norm >= MASS_TOL:
            if it >= MAX_ITER:
                full = np.zeros(self.n_zones)
                full[act] = res
                raise ConvergenceError(
                    f"airflow Newton iteration did not converge in {MAX_ITER} iterations "
                    f"(max residual {norm:.3e} kg/s)", residuals=full)
            it += 1
            g = self.n * self.c * np.maximum(np.abs(dp), _DERIV_FLOOR) ** (self.n - 1.0)
            # d(res)/dP = -inc diag(g) inc^T (dP_open/dP_zone = -inc^T)
            jac = -(inc * g) @ inc.T
            try:
                delta = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(jac, -res, rcond=None)[0]
            # Sufficient decrease of the Euclidean residual. A bare decrease test
            # is not enough: for an orifice (n = 0.5) the full Newton step maps
            # dP to -dP, and a network of such openings can cycle indefinitely
            # while the residual shrinks by a fraction of a percent per sweep.
            l2 = np.sqrt(res @ res)
            step = 1.0
            for _ in range(30):
                trial = p.copy()
                trial[act] += step * delta
                t_flows, t_dp = self.flows_for(trial, offsets)
                t_res = inc @ t_flows
                if np.sqrt(t_res @ t_res) <= (1.0 - ARMIJO * step) * l2:
                    break
                step *= 0.5
            p, flows, dp, res = trial, t_flows, t_dp, t_res
            norm = np.abs(res).max()
        return AirflowSolution(flows, p, self.incidence @ flows, it)

    def inflow_matrix(self, flows):
        """Mass flow into zone i from node j, shape (n_zones, n_zones + 1)."""
        m = np.zeros((self.n_zones + 1, self.n_zones + 1))
        pos = flows > 0
        np.add.at(m, (self.b[pos], self.a[pos]), flows[pos])
        neg = ~pos
        np.add.at(m, (self.a[neg], self.b[neg]), -flows[neg])
        return m[:self.n_zones]


def solve_airflow(model: BuildingModel, zone_air_temps, exterior_temp, wind_speed=0.0,
                  wind_direction=0.0) -> np.ndarray:
    """Mass flow through every opening of ``model`` (kg/s, model order)."""
    net = AirflowNetwork(model)
    return net.solve(zone_air_temps, exterior_temp, wind_speed, wind_direction).flows
