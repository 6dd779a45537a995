from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Mapping

from ..errors import InputError


@dataclass(frozen=True)
class SimConfig:
    """Numerical and physical settings of a simulation run.

    Film coefficients are in W/(m2 K). The exterior coefficient is
    ``h_conv_exterior + h_conv_exterior_wind * wind_speed``.
    """

    dt: float = 600.0
    max_node_thickness: float = 0.03
    h_conv_interior: float = 3.5
    h_conv_exterior: float = 18.0
    h_conv_exterior_wind: float = 4.0
    h_rad_linearized: float = 5.1
    ground_temperature: float = 19.5
    sky_temp_depression: float = 10.0
    solar_to_floor_fraction: float = 0.6
    warmup_max_days: int = 10
    warmup_tol: float = 0.01

    def __post_init__(self):
        positive = ("dt", "max_node_thickness", "h_conv_interior", "h_conv_exterior",
                    "h_rad_linearized", "warmup_tol")
        for name in positive:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputError(f"config.{name} must be positive, got {v!r}")
        if not (self.h_conv_exterior_wind >= 0 and self.sky_temp_depression >= 0):
            raise InputError("config wind and sky terms must be non-negative")
        if not 0 <= self.solar_to_floor_fraction <= 1:
            raise InputError("config.solar_to_floor_fraction must lie in [0, 1]")
        if not math.isfinite(self.ground_temperature):
            raise InputError("config.ground_temperature must be finite")
        if self.warmup_max_days < 1 or int(self.warmup_max_days) != self.warmup_max_days:
            raise InputError("config.warmup_max_days must be a positive integer")
        if 3600.0 % self.dt != 0:
            raise InputError(f"config.dt must divide 3600 s evenly, got {self.dt!r}")

    def h_exterior(self, wind_speed):
        return self.h_conv_exterior + self.h_conv_exterior_wind * wind_speed

    @property
    def steps_per_hour(self) -> int:
        return int(round(3600.0 / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return replace(cls(), **{k: type(getattr(cls(), k))(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad config value: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid config JSON: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("config JSON must be an object")
        return cls.from_dict(data.get("simulation", data))
