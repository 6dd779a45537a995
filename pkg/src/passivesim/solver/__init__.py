from .airflow import AirflowNetwork, AirflowSolution, solve_airflow
from .config import SimConfig
from .engine import (ResultSeries, SimState, ThermalNetwork, WeatherInstant, simulate,
                     step)
from .gains import SolarGains, incidence_factor, solar_gains
from .grid import WallGrid, discretize

__all__ = [
    "AirflowNetwork", "AirflowSolution", "ResultSeries", "SimConfig", "SimState",
    "SolarGains", "ThermalNetwork", "WallGrid", "WeatherInstant", "discretize",
    "incidence_factor", "simulate", "solar_gains", "solve_airflow", "step",
]
