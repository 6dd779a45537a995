"""Multi-zone transient thermal and airflow simulation of small houses,
with a scenario harness for passive winter-comfort measures."""

from .building import BuildingModel, typical_house, validate
from .comfort import ComfortSummary, ComfortThresholds, discomfort_hours
from .errors import (ConvergenceError, InputError, ModelError, SimulationError,
                     SingularSystemError, WeatherFormatError)
from .solver import ResultSeries, SimConfig, simulate
from .study import Scenario, StudyReport, builtin_scenarios, emit_report, run_study
from .weather import SiteInfo, WeatherSeries, parse_weather_csv, synth_weather

__version__ = "0.1.0"

__all__ = [
    "BuildingModel", "ComfortSummary", "ComfortThresholds", "ConvergenceError", "InputError",
    "ModelError", "ResultSeries", "Scenario", "SimConfig", "SimulationError", "SingularSystemError",
    "SiteInfo", "StudyReport", "WeatherFormatError", "WeatherSeries", "builtin_scenarios",
    "discomfort_hours", "emit_report", "parse_weather_csv", "run_study", "simulate",
    "synth_weather", "typical_house", "validate",
]
