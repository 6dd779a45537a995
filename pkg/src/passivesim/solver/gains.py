"""Solar gains: transmission through glazing and its distribution to the
interior faces of each zone, plus absorption on opaque exterior faces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from ..building import BuildingModel
from ..weather import SurfaceIrradiance

# angular modifier coefficient for single glazing
_B0 = 0.1
_DIFFUSE_ANGLE = 60.0


def incidence_factor(cos_incidence):
    """Relative beam transmittance versus normal incidence (1 at normal)."""
    c = np.asarray(cos_incidence, dtype=float)
    safe = np.where(c > 1e-6, c, 1.0)
    k = np.where(c > 1e-6, 1.0 - _B0 * (1.0 / safe - 1.0), 0.0)
    return np.clip(k, 0.0, 1.0)


DIFFUSE_FACTOR = float(incidence_factor(math.cos(math.radians(_DIFFUSE_ANGLE))))


@dataclass(frozen=True)
class Face:
    surface: str
    side: str  # "inner" (owner zone) or "outer" (faces the boundary zone)


@dataclass
class ZoneSolarShares:
    """How transmitted solar power in one zone is split between faces.

    ``shares`` sums with ``escape`` to exactly 1.
    """

    zone: str
    floor: Optional[Face]
    base_floor_share: float  # solar_to_floor_fraction, before absorptance
    floor_absorptance: float
    faces: list = field(default_factory=list)   # non-floor interior faces
    areas: list = field(default_factory=list)
    glazing_area: float = 0.0

    def distribution(self) -> tuple:
        """Return ({face: fraction}, escaped fraction)."""
        out = {}
        floor_part = self.base_floor_share * self.floor_absorptance if self.floor else 0.0
        if self.floor:
            out[self.floor] = floor_part
        rest = 1.0 - floor_part
        total = sum(self.areas) + self.glazing_area
        if total <= 0:
            if self.floor:
                out[self.floor] = 1.0
            return out, 0.0
        for f, a in zip(self.faces, self.areas):
            out[f] = out.get(f, 0.0) + rest * a / total
        return out, rest * self.glazing_area / total


def interior_faces(model: BuildingModel) -> dict:
    """Map zone name -> list of (Face, area) facing into that zone (opaque only)."""
    faces = {z.name: [] for z in model.zones}
    for z, s in model.surfaces():
        if s.net_area <= 0:
            continue
        faces[z.name].append((Face(s.name, "inner"), s.net_area))
        if s.boundary.kind == "zone" and s.boundary.zone in faces:
            faces[s.boundary.zone].append((Face(s.name, "outer"), s.net_area))
    return faces


def zone_shares(model: BuildingModel, solar_to_floor_fraction: float) -> list:
    faces = interior_faces(model)
    out = []
    for z in model.zones:
        floor_name = z.floor_surface
        try:
            floor_alpha = z.surface(floor_name).construction.exterior_absorptance
        except KeyError:
            floor_alpha = 0.0
        floor = None
        names, areas = [], []
        for f, a in faces[z.name]:
            if f.surface == floor_name and f.side == "inner":
                floor = f
            else:
                names.append(f)
                areas.append(a)
        glz = sum(s.glazed_area for s in z.surfaces)
        out.append(ZoneSolarShares(z.name, floor, solar_to_floor_fraction, floor_alpha,
                                   names, areas, glz))
    return out


@dataclass(frozen=True)
class SolarGains:
    transmitted: dict          # zone -> W through glazing
    absorbed_interior: dict    # Face -> W
    escaped: dict              # zone -> W reflected back out through glazing
    absorbed_exterior: dict    # surface -> W on opaque exterior faces

    def floor_absorbed(self, model: BuildingModel, zone: str) -> float:
        return self.absorbed_interior.get(Face(model.zone(zone).floor_surface, "inner"), 0.0)


def transmitted_power(glazings, irradiance: SurfaceIrradiance, cos_incidence: float = 1.0) -> float:
    k_beam = float(incidence_factor(cos_incidence))
    diffuse = irradiance.sky_diffuse + irradiance.ground_reflected
    return sum(g.area * g.shgc * (k_beam * irradiance.beam + DIFFUSE_FACTOR * diffuse)
               for g in glazings)


def solar_gains(model: BuildingModel, irradiance: Mapping[str, SurfaceIrradiance],
                cos_incidence: Optional[Mapping[str, float]] = None,
                solar_to_floor_fraction: float = 0.6) -> SolarGains:
    """Per-zone solar gain decomposition for one instant.

    Parameters
    ----------
    irradiance
        Surface name -> irradiance on its exterior plane, for exterior
        surfaces. Missing surfaces receive nothing.
    cos_incidence
        Surface name -> cosine of the beam incidence angle; default normal
        incidence.

    Notes
    -----
    Transmitted power is ``area * shgc * (k(theta) * beam + k_d * diffuse)``.
    The floor absorbs ``solar_to_floor_fraction * absorptance`` of it; the
    rest spreads over the other interior faces and the glazing by area,
    and the glazing share leaves the zone.
    """
    cos_incidence = cos_incidence or {}
    transmitted = {}
    exterior = {}
    for z in model.zones:
        total = 0.0
        for s in z.surfaces:
            if s.boundary.kind != "exterior" or s.name not in irradiance:
                continue
            irr = irradiance[s.name]
            if s.glazings:
                total += transmitted_power(s.glazings, irr, cos_incidence.get(s.name, 1.0))
            exterior[s.name] = s.construction.exterior_absorptance * irr.total * s.net_area
        transmitted[z.name] = total
    absorbed = {}
    escaped = {}
    for shares in zone_shares(model, solar_to_floor_fraction):
        dist, esc = shares.distribution()
        q = transmitted[shares.zone]
        for f, frac in dist.items():
            absorbed[f] = absorbed.get(f, 0.0) + frac * q
        escaped[shares.zone] = esc * q
    return SolarGains(transmitted, absorbed, escaped, exterior)
