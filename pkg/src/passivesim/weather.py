"""Hourly weather data: parsing, solar geometry, tilted irradiance,
cold-sequence selection and a synthetic design-weather generator.

Angles are in degrees throughout the public API. Azimuths are measured
clockwise from north, so a north-facing wall has azimuth 0 and the noon
sun seen from the southern tropics in June also sits near azimuth 0.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from functools import cached_property
from typing import Iterable, Optional, Sequence, TextIO, Union

import numpy as np

from .errors import InputError, WeatherFormatError

CSV_HEADER = ("timestamp", "dry_bulb_c", "rh_pct", "ghi_wm2", "dhi_wm2",
              "wind_ms", "wind_dir_deg")

# decimals used by emit_weather_csv, one per numeric column
CSV_PRECISION = (2, 1, 1, 1, 2, 1)

SOLAR_CONSTANT = 1367.0  # W/m2
LOW_SUN_ALTITUDE = 2.0  # deg, beam is dropped below this

_TIMESTAMP_RE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})T(\d{2}):00$")
_SITE_RE = re.compile(r"^#\s*site\s+(.*)$")


@dataclass(frozen=True)
class SiteInfo:
    """Geographic site description.

    The defaults place the site in Antananarivo. They are not taken from
    any published station record and can be overridden freely.
    """

    latitude: float = -18.9
    longitude: float = 47.5
    utc_offset: float = 3.0
    ground_albedo: float = 0.2

    def __post_init__(self):
        if not abs(self.latitude) <= 90:
            raise InputError(f"latitude out of range: {self.latitude}")
        if not abs(self.longitude) <= 180:
            raise InputError(f"longitude out of range: {self.longitude}")
        if not 0 <= self.ground_albedo <= 1:
            raise InputError(f"ground_albedo out of range: {self.ground_albedo}")

    def same_location(self, other: "SiteInfo") -> bool:
        return (math.isclose(self.latitude, other.latitude, abs_tol=1e-6)
                and math.isclose(self.longitude, other.longitude, abs_tol=1e-6)
                and math.isclose(self.utc_offset, other.utc_offset, abs_tol=1e-9))


@dataclass(frozen=True)
class WeatherRecord:
    timestamp: datetime
    dry_bulb: float
    relative_humidity: float
    global_horizontal: float
    diffuse_horizontal: float
    wind_speed: float
    wind_direction: float

    def __post_init__(self):
        for name in ("dry_bulb", "relative_humidity", "global_horizontal",
                     "diffuse_horizontal", "wind_speed", "wind_direction"):
            if not math.isfinite(getattr(self, name)):
                raise WeatherFormatError("value is not finite", field=name)
        if not 0 <= self.relative_humidity <= 100:
            raise WeatherFormatError(
                f"relative humidity {self.relative_humidity} outside [0, 100]",
                field="rh_pct")
        if self.global_horizontal < 0:
            raise WeatherFormatError("negative global irradiance", field="ghi_wm2")
        if not 0 <= self.diffuse_horizontal <= self.global_horizontal:
            raise WeatherFormatError(
                "diffuse irradiance must lie in [0, global]", field="dhi_wm2")
        if self.wind_speed < 0:
            raise WeatherFormatError("negative wind speed", field="wind_ms")
        if not 0 <= self.wind_direction < 360:
            raise WeatherFormatError(
                f"wind direction {self.wind_direction} outside [0, 360)",
                field="wind_dir_deg")


def _check_hourly(timestamps: Sequence[datetime], first_line: int = 0):
    one_hour = timedelta(hours=1)
    for i in range(1, len(timestamps)):
        step = timestamps[i] - timestamps[i - 1]
        if step != one_hour:
            kind = "non-increasing" if step <= timedelta(0) else "gapped"
            line = first_line + i if first_line else None
            raise WeatherFormatError(
                f"{kind} timestamp {timestamps[i].isoformat(timespec='minutes')}"
                " (records must be spaced exactly one hour apart)", line=line)


@dataclass(frozen=True)
class WeatherSeries:
    """Hourly weather for one site.

    ``site`` may be None when the source file does not declare a location;
    the simulation then uses the building's site.
    """

    site: Optional[SiteInfo]
    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise InputError("weather series is empty")
        _check_hourly([r.timestamp for r in self.records])

    def __len__(self):
        return len(self.records)

    @cached_property
    def timestamps(self) -> list:
        return [r.timestamp for r in self.records]

    @cached_property
    def dry_bulb(self) -> np.ndarray:
        return np.array([r.dry_bulb for r in self.records])

    @cached_property
    def ghi(self) -> np.ndarray:
        return np.array([r.global_horizontal for r in self.records])

    @cached_property
    def dhi(self) -> np.ndarray:
        return np.array([r.diffuse_horizontal for r in self.records])

    @cached_property
    def wind_speed(self) -> np.ndarray:
        return np.array([r.wind_speed for r in self.records])

    @cached_property
    def wind_direction(self) -> np.ndarray:
        return np.array([r.wind_direction for r in self.records])


@dataclass(frozen=True)
class SolarPosition:
    altitude: float
    azimuth: float


@dataclass(frozen=True)
class SurfaceIrradiance:
    beam: float
    sky_diffuse: float
    ground_reflected: float
    total: float


@dataclass(frozen=True)
class TypicalSequence:
    records: tuple
    start_index: int
    length_days: int
    score: float
    site: Optional[SiteInfo] = None

    def as_series(self) -> WeatherSeries:
        return WeatherSeries(self.site, self.records)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _parse_site(text: str, line: int) -> SiteInfo:
    values = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise WeatherFormatError(f"bad site token '{token}'", line=line)
        try:
            values[key] = float(value)
        except ValueError:
            raise WeatherFormatError(f"bad site value '{token}'", line=line) from None
    try:
        return SiteInfo(**values)
    except TypeError as exc:
        raise WeatherFormatError(f"unknown site key: {exc}", line=line) from None
    except InputError as exc:
        raise WeatherFormatError(str(exc), line=line) from None


def parse_weather_csv(text: Union[str, TextIO]) -> WeatherSeries:
    """Parse the hourly weather CSV format.

    Leading ``#`` lines are comments; one of them may declare the site as
    ``# site latitude=-18.9 longitude=47.5 utc_offset=3 ground_albedo=0.2``.
    The first non-comment line must be the exact header.

    Raises
    ------
    WeatherFormatError
        With the 1-based line number of the offending row.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = text.splitlines()
    site = None
    lineno = 0
    while lineno < len(lines) and lines[lineno].startswith("#"):
        m = _SITE_RE.match(lines[lineno])
        if m:
            site = _parse_site(m.group(1), lineno + 1)
        lineno += 1
    if lineno >= len(lines):
        raise WeatherFormatError("missing header row")
    header = lines[lineno].strip()
    if header != ",".join(CSV_HEADER):
        raise WeatherFormatError(f"unexpected header '{header}'", line=lineno + 1)
    first_data_line = lineno + 2

    records = []
    reader = csv.reader(lines[lineno + 1:])
    for offset, row in enumerate(reader):
        line = first_data_line + offset
        if not row or all(not c.strip() for c in row):
            raise WeatherFormatError("blank row", line=line)
        if len(row) != len(CSV_HEADER):
            raise WeatherFormatError(
                f"expected {len(CSV_HEADER)} columns, got {len(row)}", line=line)
        m = _TIMESTAMP_RE.match(row[0].strip())
        if not m:
            raise WeatherFormatError(f"bad timestamp '{row[0]}'", line=line,
                                     field="timestamp")
        try:
            ts = datetime(*(int(g) for g in m.groups()))
        except ValueError as exc:
            raise WeatherFormatError(str(exc), line=line, field="timestamp") from None
        values = []
        for name, raw in zip(CSV_HEADER[1:], row[1:]):
            try:
                values.append(float(raw))
            except ValueError:
                raise WeatherFormatError(f"not a number: '{raw}'", line=line,
                                         field=name) from None
        try:
            records.append(WeatherRecord(ts, *values))
        except WeatherFormatError as exc:
            raise WeatherFormatError(exc.message, line=line, field=exc.field) from None
    if not records:
        raise WeatherFormatError("no data rows")
    _check_hourly([r.timestamp for r in records], first_line=first_data_line)
    return WeatherSeries(site, tuple(records))


def emit_weather_csv(series: WeatherSeries) -> str:
    out = io.StringIO()
    if series.site is not None:
        s = series.site
        out.write(f"# site latitude={s.latitude!r} longitude={s.longitude!r} "
                  f"utc_offset={s.utc_offset!r} ground_albedo={s.ground_albedo!r}\n")
    out.write(",".join(CSV_HEADER) + "\n")
    for r in series.records:
        nums = (r.dry_bulb, r.relative_humidity, r.global_horizontal,
                r.diffuse_horizontal, r.wind_speed, r.wind_direction)
        cells = [f"{v:.{p}f}" for v, p in zip(nums, CSV_PRECISION)]
        # "-0.00" would not survive a round trip byte-for-byte
        cells = ["0." + "0" * p if c.startswith("-") and float(c) == 0 else c
                 for c, p in zip(cells, CSV_PRECISION)]
        out.write(r.timestamp.strftime("%Y-%m-%dT%H:00") + "," + ",".join(cells) + "\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# Solar geometry
# ---------------------------------------------------------------------------

def _fractional_year(day_of_year, clock_hour):
    return 2.0 * np.pi * (np.asarray(day_of_year) - 1 + (np.asarray(clock_hour) - 12) / 24) / 365.0


def declination(day_of_year, clock_hour=12.0):
    """Solar declination in degrees (Spencer Fourier series)."""
    g = _fractional_year(day_of_year, clock_hour)
    d = (0.006918 - 0.399912 * np.cos(g) + 0.070257 * np.sin(g)
         - 0.006758 * np.cos(2 * g) + 0.000907 * np.sin(2 * g)
         - 0.002697 * np.cos(3 * g) + 0.00148 * np.sin(3 * g))
    return np.degrees(d)


def equation_of_time(day_of_year, clock_hour=12.0):
    """Equation of time in minutes (Spencer Fourier series)."""
    g = _fractional_year(day_of_year, clock_hour)
    return 229.18 * (0.000075 + 0.001868 * np.cos(g) - 0.032077 * np.sin(g)
                     - 0.014615 * np.cos(2 * g) - 0.040849 * np.sin(2 * g))


def extraterrestrial_normal(day_of_year):
    """Extraterrestrial normal irradiance in W/m2."""
    return SOLAR_CONSTANT * (1 + 0.033 * np.cos(2 * np.pi * np.asarray(day_of_year) / 365.0))


def _time_parts(timestamps: Iterable[datetime]):
    ts = list(timestamps)
    doy = np.array([t.timetuple().tm_yday for t in ts], dtype=float)
    hour = np.array([t.hour + t.minute / 60 + t.second / 3600 for t in ts])
    return doy, hour


def solar_angles(site: SiteInfo, day_of_year, clock_hour):
    """Vectorised solar altitude and azimuth (degrees) for local clock time."""
    doy = np.asarray(day_of_year, dtype=float)
    hour = np.asarray(clock_hour, dtype=float)
    dec = np.radians(declination(doy, hour))
    solar_time = hour + (4.0 * (site.longitude - 15.0 * site.utc_offset)
                         + equation_of_time(doy, hour)) / 60.0
    omega = np.radians(15.0 * (solar_time - 12.0))
    lat = math.radians(site.latitude)
    sin_alt = (math.sin(lat) * np.sin(dec)
               + math.cos(lat) * np.cos(dec) * np.cos(omega))
    alt = np.arcsin(np.clip(sin_alt, -1.0, 1.0))
    az = np.arctan2(-np.cos(dec) * np.sin(omega) * math.cos(lat),
                    np.sin(dec) - sin_alt * math.sin(lat))
    return np.degrees(alt), np.mod(np.degrees(az), 360.0)


def solar_position(site: SiteInfo, timestamp: datetime) -> SolarPosition:
    """Sun altitude and azimuth for a local civil timestamp.

    Declination and equation of time use Spencer's Fourier series; the hour
    angle is taken from local solar time corrected for longitude and time
    zone.
    """
    doy, hour = _time_parts([timestamp])
    alt, az = solar_angles(site, doy, hour)
    az = float(az[0])
    return SolarPosition(float(alt[0]), 0.0 if az >= 360.0 else az)


def incidence_cosine(altitude, azimuth, tilt, surface_azimuth):
    alt = np.radians(altitude)
    t = np.radians(tilt)
    return (np.sin(alt) * np.cos(t)
            + np.cos(alt) * np.sin(t) * np.cos(np.radians(np.asarray(azimuth) - surface_azimuth)))


def direct_normal(ghi, dhi, altitude):
    """Direct normal irradiance (GHI - DHI) / sin(altitude), zero for low sun."""
    ghi = np.asarray(ghi, dtype=float)
    altitude = np.asarray(altitude, dtype=float)
    sin_alt = np.sin(np.radians(altitude))
    beam_h = np.maximum(ghi - np.asarray(dhi, dtype=float), 0.0)
    return np.divide(beam_h, sin_alt, out=np.zeros(np.broadcast(beam_h, sin_alt).shape),
                     where=altitude > LOW_SUN_ALTITUDE)


def tilted_from_normal(dni, dhi, altitude, azimuth, tilt, surface_azimuth, albedo):
    """Isotropic-sky split from direct normal and diffuse horizontal irradiance.

    Returns (beam, sky, ground, cos_incidence). The beam vanishes once the
    sun is below the horizon, so it fades out smoothly with the sun.
    """
    dni = np.asarray(dni, dtype=float)
    dhi = np.asarray(dhi, dtype=float)
    altitude = np.asarray(altitude, dtype=float)
    cos_inc = incidence_cosine(altitude, azimuth, tilt, surface_azimuth)
    above = altitude > 0.0
    beam = np.where(above, dni * np.maximum(cos_inc, 0.0), 0.0)
    ghi = np.where(above, dni * np.sin(np.radians(altitude)), 0.0) + dhi
    ct = math.cos(math.radians(tilt))
    return beam, dhi * (1 + ct) / 2, ghi * albedo * (1 - ct) / 2, cos_inc


def tilted_components(ghi, dhi, altitude, azimuth, tilt, surface_azimuth, albedo):
    """Vectorised isotropic-sky split; returns (beam, sky, ground, cos_incidence)."""
    ghi = np.asarray(ghi, dtype=float)
    dhi = np.asarray(dhi, dtype=float)
    cos_inc = incidence_cosine(altitude, azimuth, tilt, surface_azimuth)
    beam = direct_normal(ghi, dhi, altitude) * np.maximum(cos_inc, 0.0)
    ct = math.cos(math.radians(tilt))
    sky = dhi * (1 + ct) / 2
    ground = ghi * albedo * (1 - ct) / 2
    return beam, sky, ground, cos_inc


def tilt_irradiance(record: WeatherRecord, pos: SolarPosition, tilt: float,
                    surface_azimuth: float, albedo: float) -> SurfaceIrradiance:
    """Irradiance on a tilted plane with the isotropic sky model.

    Parameters
    ----------
    record : WeatherRecord
        Supplies global and diffuse horizontal irradiance.
    pos : SolarPosition
        Sun position at the record time.
    tilt : float
        Angle between the surface's outward normal and the zenith, 0..180.
    surface_azimuth : float
        Azimuth of the outward normal.
    albedo : float
        Ground reflectance.

    Notes
    -----
    Direct normal irradiance is reconstructed as (GHI - DHI) / sin(altitude);
    with the sun at or below 2 degrees the beam term is dropped.
    """
    if not 0 <= tilt <= 180:
        raise InputError(f"tilt must lie in [0, 180], got {tilt}")
    beam, sky, ground, _ = tilted_components(
        record.global_horizontal, record.diffuse_horizontal,
        pos.altitude, pos.azimuth, tilt, surface_azimuth, albedo)
    beam, sky, ground = float(beam), float(sky), float(ground)
    return SurfaceIrradiance(beam, sky, ground, beam + sky + ground)


# ---------------------------------------------------------------------------
# Sequence selection and synthesis
# ---------------------------------------------------------------------------

def select_cold_sequence(series: WeatherSeries, window_days: int) -> TypicalSequence:
    """Pick the contiguous window with the lowest mean dry-bulb temperature.

    Every hourly start index is considered. Ties go first to windows that
    contain the series' absolute minimum temperature, then to the earliest
    start.
    """
    if window_days < 1:
        raise InputError("window_days must be at least 1")
    width = 24 * window_days
    temps = series.dry_bulb
    if width > len(temps):
        raise InputError(f"window of {window_days} days exceeds series length "
                         f"({len(temps)} hours)")
    windows = np.lib.stride_tricks.sliding_window_view(temps, width)
    scores = windows.sum(axis=1) / width
    best = scores.min()
    tied = np.flatnonzero(np.isclose(scores, best, rtol=1e-12, atol=1e-12))
    t_min = temps.min()
    min_positions = np.flatnonzero(temps == t_min)
    start = int(tied[0])
    for s in tied:
        if np.any((min_positions >= s) & (min_positions < s + width)):
            start = int(s)
            break
    return TypicalSequence(series.records[start:start + width], start, window_days,
                           float(scores[start]), series.site)


def _daily_temperature(hour, t_min, t_max):
    """Asymmetric sinusoid: minimum at 06:00, maximum at 15:00."""
    mid = (t_min + t_max) / 2
    amp = (t_max - t_min) / 2
    h = np.asarray(hour, dtype=float)
    rising = (h >= 6) & (h <= 15)
    falling_pos = np.where(h > 15, h - 15, h + 9)
    return np.where(rising,
                    mid - amp * np.cos(np.pi * (h - 6) / 9),
                    mid + amp * np.cos(np.pi * falling_pos / 15))


def synth_weather(site: SiteInfo, days: int, t_min: float, t_max: float,
                  clearness: float, rh: float, wind: float, *,
                  wind_direction: float = 120.0,
                  start: date = date(2023, 6, 18)) -> WeatherSeries:
    """Generate a repeating design-day weather series.

    Dry-bulb follows a daily sinusoid (minimum at 06:00, maximum at
    15:00). Global horizontal irradiance is ``clearness`` times the
    extraterrestrial normal irradiance times the sine of solar altitude;
    diffuse is a quarter of global. Humidity and wind are constant.
    """
    if days < 1:
        raise InputError("days must be at least 1")
    if t_min > t_max:
        raise InputError("t_min must not exceed t_max")
    if not 0 <= clearness <= 1:
        raise InputError("clearness must lie in [0, 1]")
    t0 = datetime(start.year, start.month, start.day)
    stamps = [t0 + timedelta(hours=h) for h in range(24 * days)]
    doy, hour = _time_parts(stamps)
    alt, _ = solar_angles(site, doy, hour)
    ghi = clearness * extraterrestrial_normal(doy) * np.sin(np.radians(alt))
    ghi = np.maximum(ghi, 0.0)
    dhi = 0.25 * ghi
    temps = _daily_temperature(hour, t_min, t_max)
    records = tuple(
        WeatherRecord(ts, float(t), float(rh), float(g), float(d), float(wind),
                      float(wind_direction))
        for ts, t, g, d in zip(stamps, temps, ghi, dhi))
    return WeatherSeries(site, records)


def sunshine_hours(series: WeatherSeries, threshold: float = 120.0) -> int:
    return int(np.count_nonzero(series.ghi > threshold))
