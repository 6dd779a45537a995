"""Resultant temperature and day/night comfort accounting.

The resultant (dry resultant) temperature is the plain mean of air
temperature and mean radiant temperature, with the mean radiant
temperature taken as the area-weighted mean of the enclosing surfaces.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InputError

DAY_HOURS = frozenset(range(7, 19))                          # 07..18
NIGHT_HOURS = frozenset(list(range(19, 24)) + list(range(0, 7)))  # 19..23, 00..06

SUMMARY_HEADER = "zone,t_res_day_c,t_res_night_c,discomfort_day_h,discomfort_night_h"


@dataclass(frozen=True)
class ComfortThresholds:
    night_threshold: float = 17.0
    day_threshold: float = 19.0

    def __post_init__(self):
        if not (np.isfinite(self.night_threshold) and np.isfinite(self.day_threshold)):
            raise InputError("comfort thresholds must be finite")


@dataclass(frozen=True)
class ZoneComfort:
    zone: str
    t_res_day: Optional[float]
    t_res_night: Optional[float]
    discomfort_hours_day: int
    discomfort_hours_night: int
    hours_day: int
    hours_night: int

    @property
    def discomfort_hours(self) -> int:
        return self.discomfort_hours_day + self.discomfort_hours_night


@dataclass(frozen=True)
class ComfortSummary:
    zones: tuple

    def __getitem__(self, name: str) -> ZoneComfort:
        for z in self.zones:
            if z.zone == name:
                return z
        raise KeyError(name)

    @property
    def zone_names(self) -> list:
        return [z.zone for z in self.zones]

    @property
    def total_discomfort_hours(self) -> int:
        return sum(z.discomfort_hours for z in self.zones)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(SUMMARY_HEADER + "\n")
        for z in self.zones:
            out.write(f"{z.zone},{_fmt(z.t_res_day)},{_fmt(z.t_res_night)},"
                      f"{z.discomfort_hours_day},{z.discomfort_hours_night}\n")
        return out.getvalue()


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def mean_radiant_temperature(areas, temperatures):
    """Area-weighted mean surface temperature along the last axis."""
    a = np.asarray(areas, dtype=float)
    t = np.asarray(temperatures, dtype=float)
    if a.size == 0:
        raise InputError("mean radiant temperature needs at least one surface")
    if np.any(a <= 0):
        raise InputError("surface areas must be positive")
    return (t * a).sum(axis=-1) / a.sum()


def resultant_from_mrt(t_air, t_mrt):
    return (np.asarray(t_air) + np.asarray(t_mrt)) / 2.0


def resultant_temperature(t_air: float, surfaces: Sequence[Tuple[float, float]]) -> float:
    """Resultant temperature from air temperature and (area, temperature) pairs.

    >>> resultant_temperature(18.0, [(10.0, 22.0), (30.0, 14.0)])
    17.0
    """
    if not surfaces:
        raise InputError("resultant temperature needs at least one surface")
    areas, temps = zip(*surfaces)
    t_mrt = float(mean_radiant_temperature(areas, temps))
    return float(resultant_from_mrt(t_air, t_mrt))


def _hours(series) -> np.ndarray:
    return np.array([t.hour for t in series.timestamps])


def _zone_column(series, zone: str) -> np.ndarray:
    try:
        idx = list(series.zones).index(zone)
    except ValueError:
        raise InputError(f"zone {zone!r} not in result series") from None
    return series.t_res[:, idx]


def day_night_averages(series, zone: str) -> Tuple[Optional[float], Optional[float]]:
    """Mean resultant temperature over day (07-18 h) and night (19-06 h) hours.

    A period with no member hours in the series is reported as None.
    """
    values = _zone_column(series, zone)
    hours = _hours(series)
    day = np.isin(hours, sorted(DAY_HOURS))
    night = ~day
    mean_day = float(values[day].mean()) if day.any() else None
    mean_night = float(values[night].mean()) if night.any() else None
    return mean_day, mean_night


def discomfort_hours(series, thresholds: ComfortThresholds = ComfortThresholds()) -> ComfortSummary:
    """Per-zone summary with counts of hours strictly below the threshold.

    Day hours are judged against ``day_threshold`` and night hours against
    ``night_threshold``; a value equal to the threshold is comfortable.
    """
    hours = _hours(series)
    day = np.isin(hours, sorted(DAY_HOURS))
    night = ~day
    zones = []
    for i, name in enumerate(series.zones):
        t_res = series.t_res[:, i]
        d_mean, n_mean = day_night_averages(series, name)
        zones.append(ZoneComfort(
            name, d_mean, n_mean,
            int(np.count_nonzero(t_res[day] < thresholds.day_threshold)),
            int(np.count_nonzero(t_res[night] < thresholds.night_threshold)),
            int(day.sum()), int(night.sum())))
    return ComfortSummary(tuple(zones))


summarize = discomfort_hours
