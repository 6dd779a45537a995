"""Building description: materials, layered constructions, zones and the
airflow openings between them, plus the envelope transformations used by
the passive-design study.

Every type is an immutable dataclass; transformations return new models.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .errors import ModelError
from .weather import SiteInfo

EXTERIOR = "exterior"
AIR_DENSITY = 1.2  # kg/m3, used for opening sizing only

SURFACE_KINDS = ("wall", "roof", "floor", "door", "partition")


@dataclass(frozen=True)
class Material:
    name: str
    conductivity: float
    density: float
    specific_heat: float
    # gap layers: conduct but store no heat
    resistive_only: bool = False

    def __post_init__(self):
        for attr in ("conductivity", "density", "specific_heat"):
            v = getattr(self, attr)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ModelError(f"{attr} must be positive, got {v!r}")


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float

    def __post_init__(self):
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise ModelError(f"thickness must be positive, got {self.thickness!r}")

    @property
    def resistance(self) -> float:
        return self.thickness / self.material.conductivity


def _check_fraction(name, value):
    if not (math.isfinite(value) and 0 <= value <= 1):
        raise ModelError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class Construction:
    """Layer stack listed from the outside face to the inside face."""

    layers: tuple
    exterior_absorptance: float = 0.7
    exterior_emissivity: float = 0.9
    interior_emissivity: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ModelError("construction needs at least one layer")
        for name in ("exterior_absorptance", "exterior_emissivity", "interior_emissivity"):
            _check_fraction(name, getattr(self, name))

    @property
    def resistance(self) -> float:
        """Conduction resistance, m2K/W, without surface films."""
        return sum(layer.resistance for layer in self.layers)


@dataclass(frozen=True)
class Glazing:
    area: float
    u_value: float = 5.8
    shgc: float = 0.85

    def __post_init__(self):
        if not (math.isfinite(self.area) and self.area > 0):
            raise ModelError(f"glazing area must be positive, got {self.area!r}")
        if not self.u_value > 0:
            raise ModelError(f"u_value must be positive, got {self.u_value!r}")
        if not 0 < self.shgc <= 1:
            raise ModelError(f"shgc must lie in (0, 1], got {self.shgc!r}")


@dataclass(frozen=True)
class Boundary:
    """What the outside face of a surface sees."""

    kind: str  # "exterior" | "zone" | "ground" | "adiabatic"
    zone: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("exterior", "zone", "ground", "adiabatic"):
            raise ModelError(f"unknown boundary kind {self.kind!r}")
        if (self.kind == "zone") != (self.zone is not None):
            raise ModelError("a zone boundary needs exactly one zone name")

    @classmethod
    def to_zone(cls, name: str) -> "Boundary":
        return cls("zone", name)

    def __str__(self):
        return f"zone:{self.zone}" if self.kind == "zone" else self.kind


Boundary.EXTERIOR = Boundary("exterior")
Boundary.GROUND = Boundary("ground")
Boundary.ADIABATIC = Boundary("adiabatic")


@dataclass(frozen=True)
class Surface:
    """A planar envelope element owned by one zone.

    ``tilt`` is the angle between the outward normal and the zenith
    (walls 90, floors 180) and ``azimuth`` the direction of the outward
    normal. Glazing areas are included in ``gross_area``.
    """

    name: str
    kind: str
    gross_area: float
    tilt: float
    azimuth: float
    construction: Construction
    boundary: Boundary
    glazings: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "glazings", tuple(self.glazings))
        if self.kind not in SURFACE_KINDS:
            raise ModelError(f"unknown surface kind {self.kind!r}")
        if not 0 <= self.tilt <= 180:
            raise ModelError(f"tilt must lie in [0, 180], got {self.tilt!r}")

    @property
    def glazed_area(self) -> float:
        return sum(g.area for g in self.glazings)

    @property
    def net_area(self) -> float:
        return self.gross_area - self.glazed_area


@dataclass(frozen=True)
class Opening:
    """Power-law crack or orifice between two airflow nodes.

    ``connects`` holds two zone names or one zone name and ``EXTERIOR``.
    ``azimuth`` is the facade normal for exterior openings (used for wind
    pressure); None means a roof or sheltered opening.
    """

    name: str
    connects: tuple
    flow_coefficient: float
    exponent: float
    height: float
    azimuth: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "connects", tuple(self.connects))
        if len(self.connects) != 2:
            raise ModelError("an opening connects exactly two nodes")
        if not (math.isfinite(self.flow_coefficient) and self.flow_coefficient > 0):
            raise ModelError(f"flow_coefficient must be positive, got {self.flow_coefficient!r}")
        if not 0.5 <= self.exponent <= 1.0:
            raise ModelError(f"exponent must lie in [0.5, 1.0], got {self.exponent!r}")


@dataclass(frozen=True)
class Zone:
    name: str
    volume: float
    surfaces: tuple
    openings: tuple = ()
    floor_surface: str = ""

    def __post_init__(self):
        object.__setattr__(self, "surfaces", tuple(self.surfaces))
        object.__setattr__(self, "openings", tuple(self.openings))
        if self.name == EXTERIOR:
            raise ModelError(f"'{EXTERIOR}' is reserved and cannot name a zone")

    def surface(self, name: str) -> Surface:
        for s in self.surfaces:
            if s.name == name:
                return s
        raise KeyError(name)


@dataclass(frozen=True)
class BuildingModel:
    site: SiteInfo
    zones: tuple
    orientation: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(self.zones))

    @property
    def zone_names(self) -> list:
        return [z.name for z in self.zones]

    def zone(self, name: str) -> Zone:
        for z in self.zones:
            if z.name == name:
                return z
        raise KeyError(name)

    def surfaces(self):
        """Yield (zone, surface) pairs."""
        for z in self.zones:
            for s in z.surfaces:
                yield z, s

    def openings(self):
        for z in self.zones:
            yield from z.openings


# ---------------------------------------------------------------------------
# Material library
# ---------------------------------------------------------------------------
# Conductivities of the first five entries are the tabulated house
# materials. Densities and heat capacities, and everything about straw,
# torchi, soil and screed, are literature-typical values.

UNBURNED_BRICK = Material("unburned_brick", 0.69, 1700.0, 840.0)
PINE = Material("pine", 0.16, 500.0, 1600.0)
TILE = Material("tile", 0.60, 1900.0, 800.0)
ROOF_AIR = Material("roof_air", 0.85, 1.2, 1005.0, resistive_only=True)
PLASTER = Material("plaster", 0.29, 800.0, 840.0)
STRAW = Material("straw", 0.07, 100.0, 1400.0)
TORCHI = Material("torchi", 0.25, 1200.0, 900.0)
SOIL = Material("soil", 1.5, 1800.0, 1000.0)
SCREED = Material("screed", 1.15, 2000.0, 880.0)

MATERIALS = {m.name: m for m in (UNBURNED_BRICK, PINE, TILE, ROOF_AIR, PLASTER,
                                 STRAW, TORCHI, SOIL, SCREED)}

CEILING_HEIGHT = 2.6
ROOF_PITCH = 20.0
WALL_ABSORPTANCE = 0.7
ROOF_ABSORPTANCE = 0.6
FLOOR_ABSORPTANCE = 0.7

WALL = Construction((Layer(UNBURNED_BRICK, 0.22),), WALL_ABSORPTANCE)
PARTITION = Construction((Layer(UNBURNED_BRICK, 0.11),), WALL_ABSORPTANCE)
DOOR = Construction((Layer(PINE, 0.035),), 0.6)
ROOF = Construction((Layer(TILE, 0.015), Layer(ROOF_AIR, 0.17), Layer(PLASTER, 0.005)),
                    ROOF_ABSORPTANCE)
# Soil between the screed and the fixed-temperature ground boundary. For a
# slab on grade of this footprint the heat path to undisturbed ground is
# of the order of the half-width of the house, hence 2 m of soil.
GROUND_DEPTH = 2.0
FLOOR = Construction((Layer(SOIL, GROUND_DEPTH), Layer(SCREED, 0.05)), FLOOR_ABSORPTANCE)

CRACK_EXPONENT = 0.65
CRACK_HEIGHTS = (0.1, 2.0)
TARGET_ACH = 0.5
TARGET_PRESSURE = 4.0  # Pa
DOOR_FLOW_COEFFICIENT = 0.02  # kg/(s Pa^0.5), roughly a 0.02 m2 effective gap
DOOR_EXPONENT = 0.5
DOOR_OPENING_HEIGHT = 1.0


def _wall(name, area, azimuth, glazing=None):
    glz = (Glazing(glazing),) if glazing else ()
    return Surface(name, "wall", area, 90.0, azimuth, WALL, Boundary.EXTERIOR, glz)


def _partition(name, area, other, kind="partition"):
    cons = DOOR if kind == "door" else PARTITION
    return Surface(name, kind, area, 90.0, 0.0, cons, Boundary.to_zone(other))


def _roof(zone, area, azimuth):
    return Surface(f"{zone}_roof", "roof", area, ROOF_PITCH, azimuth, ROOF, Boundary.EXTERIOR)


def _floor(zone, area):
    return Surface(f"{zone}_floor", "floor", area, 180.0, 0.0, FLOOR, Boundary.GROUND)


def _crack_pairs(zone, volume, walls):
    """Two cracks per exterior facade, sized for TARGET_ACH at TARGET_PRESSURE."""
    n = 2 * len(walls)
    m_dot = TARGET_ACH * AIR_DENSITY * volume / 3600.0
    c = m_dot / (n * TARGET_PRESSURE ** CRACK_EXPONENT)
    out = []
    for s in walls:
        for h in CRACK_HEIGHTS:
            out.append(Opening(f"{s.name}_crack_{'low' if h < 1 else 'high'}",
                               (zone, EXTERIOR), c, CRACK_EXPONENT, h, s.azimuth))
    return tuple(out)


def _door_opening(a, b):
    return Opening(f"door_{a}_{b}", (a, b), DOOR_FLOW_COEFFICIENT, DOOR_EXPONENT,
                   DOOR_OPENING_HEIGHT)


def _zone(name, floor_area, surfaces, doors=()):
    volume = floor_area * CEILING_HEIGHT
    walls = [s for s in surfaces if s.kind in ("wall", "door") and s.boundary.kind == "exterior"]
    openings = _crack_pairs(name, volume, walls) + tuple(_door_opening(name, d) for d in doors)
    return Zone(name, volume, tuple(surfaces), openings, f"{name}_floor")


def typical_house(site: Optional[SiteInfo] = None) -> BuildingModel:
    """The reference single-storey house with the living room facing north.

    Only the four facade areas and three 1.26 m2 windows of the bedrooms
    and living room are documented; the plan of the remaining rooms is a
    reconstruction (ceiling height 2.6 m, 9.68 m x 6.82 m footprint):

        y (north)
        6.82 +-------------------------+--------+
             |                         |kitchen |
        5.02 |       living_room       +--------+
             |                         |bathroom|
        3.82 |                         +--------+
             |                         | toilet |
        2.81 +------------+------------+--------+
             |  bedroom2  |        bedroom1     |
           0 +------------+---------------------+  x (east)
             0          4.84      7.35        9.68
    """
    H = CEILING_HEIGHT
    d_bed = 7.308 / H          # 2.811 m, from the bedroom1 east facade
    w_bed = 12.58 / H          # 4.838 m, from the south facades
    w_liv = 19.12 / H          # 7.354 m, north facade
    d_liv = 10.43 / H          # 4.012 m, west facade
    w_ne = 2 * w_bed - w_liv   # 2.323 m, service rooms strip
    d_kit, d_bath = 1.8, 1.2
    d_wc = d_liv - d_kit - d_bath
    door, small_door = 0.8 * 2.0, 0.7 * 2.0

    bed_floor = d_bed * w_bed
    bedroom1 = _zone("bedroom1", bed_floor, [
        _wall("bedroom1_wall_e", 7.308, 90.0, glazing=1.26),
        _wall("bedroom1_wall_s", 12.58, 180.0),
        _partition("bedroom1_part_bedroom2", d_bed * H, "bedroom2"),
        _partition("bedroom1_part_living", (w_liv - w_bed) * H - door, "living_room"),
        _partition("bedroom1_door_living", door, "living_room", kind="door"),
        _partition("bedroom1_part_toilet", w_ne * H, "toilet"),
        _roof("bedroom1", bed_floor, 180.0),
        _floor("bedroom1", bed_floor),
    ], doors=("living_room",))
    bedroom2 = _zone("bedroom2", bed_floor, [
        _wall("bedroom2_wall_s", 12.58, 180.0, glazing=1.26),
        # reconstructed: the corner room also has a west facade
        _wall("bedroom2_wall_w", d_bed * H, 270.0),
        _partition("bedroom2_part_living", w_bed * H - door, "living_room"),
        _partition("bedroom2_door_living", door, "living_room", kind="door"),
        _roof("bedroom2", bed_floor, 180.0),
        _floor("bedroom2", bed_floor),
    ], doors=("living_room",))
    liv_floor = w_liv * d_liv
    living = _zone("living_room", liv_floor, [
        _wall("living_room_wall_n", 19.12, 0.0, glazing=1.26),
        _wall("living_room_wall_w", 10.43, 270.0),
        _roof("living_room", liv_floor, 0.0),
        _floor("living_room", liv_floor),
    ])
    kit_floor = w_ne * d_kit
    kitchen = _zone("kitchen", kit_floor, [
        _wall("kitchen_wall_n", w_ne * H, 0.0),
        _wall("kitchen_wall_e", d_kit * H - door, 90.0),
        Surface("kitchen_door_e", "door", door, 90.0, 90.0, DOOR, Boundary.EXTERIOR),
        _partition("kitchen_part_living", d_kit * H - door, "living_room"),
        _partition("kitchen_door_living", door, "living_room", kind="door"),
        _partition("kitchen_part_bathroom", w_ne * H, "bathroom"),
        _roof("kitchen", kit_floor, 0.0),
        _floor("kitchen", kit_floor),
    ], doors=("living_room",))
    bath_floor = w_ne * d_bath
    bathroom = _zone("bathroom", bath_floor, [
        _wall("bathroom_wall_e", d_bath * H, 90.0),
        _partition("bathroom_part_living", d_bath * H - small_door, "living_room"),
        _partition("bathroom_door_living", small_door, "living_room", kind="door"),
        _roof("bathroom", bath_floor, 0.0),
        _floor("bathroom", bath_floor),
    ], doors=("living_room",))
    wc_floor = w_ne * d_wc
    toilet = _zone("toilet", wc_floor, [
        _wall("toilet_wall_e", d_wc * H, 90.0),
        _partition("toilet_part_living", d_wc * H - small_door, "living_room"),
        _partition("toilet_door_living", small_door, "living_room", kind="door"),
        _partition("toilet_part_bathroom", w_ne * H, "bathroom"),
        _roof("toilet", wc_floor, 180.0),
        _floor("toilet", wc_floor),
    ], doors=("living_room",))
    return BuildingModel(site or SiteInfo(),
                         (bedroom1, bedroom2, living, kitchen, bathroom, toilet), 0.0)


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def _map_surfaces(model: BuildingModel, fn) -> BuildingModel:
    zones = tuple(replace(z, surfaces=tuple(fn(s) for s in z.surfaces)) for z in model.zones)
    return replace(model, zones=zones)


def rotate(model: BuildingModel, degrees: float) -> BuildingModel:
    """Turn the whole building clockwise (seen from above) by ``degrees``."""
    if degrees == 0:
        return model

    def turn(az):
        return (az + degrees) % 360.0

    zones = []
    for z in model.zones:
        surfaces = tuple(replace(s, azimuth=turn(s.azimuth)) for s in z.surfaces)
        openings = tuple(o if o.azimuth is None else replace(o, azimuth=turn(o.azimuth))
                         for o in z.openings)
        zones.append(replace(z, surfaces=surfaces, openings=openings))
    return replace(model, zones=tuple(zones), orientation=turn(model.orientation))


_CARDINALS = {"N": 0.0, "E": 90.0, "S": 180.0, "W": 270.0}
_ALIASES = {"NORTH": "N", "EAST": "E", "SOUTH": "S", "WEST": "W"}


def cardinal(azimuth: float) -> str:
    """Nearest cardinal direction letter of an azimuth."""
    return "NESW"[int(((azimuth % 360.0) + 45.0) // 90.0) % 4]


def _normalise_fractions(fractions: Mapping[str, float]) -> dict:
    out = {}
    for key, value in fractions.items():
        k = _ALIASES.get(key.upper(), key.upper())
        if k not in _CARDINALS:
            raise ModelError(f"unknown facade direction {key!r}")
        if not (isinstance(value, (int, float)) and 0 <= value <= 0.9):
            raise ModelError(f"glazing fraction for {key} must lie in [0, 0.9], got {value!r}")
        out[k] = float(value)
    return out


def set_glazing_fractions(model: BuildingModel, fractions: Mapping[str, float]) -> BuildingModel:
    """Set the glazed share of every exterior wall by facade direction.

    Directions are judged on the unrotated building so N/E/S/W keep
    their meaning across orientation sweeps. Directions missing from
    ``fractions`` are left untouched.
    """
    fr = _normalise_fractions(fractions)

    def apply(s: Surface) -> Surface:
        if s.kind != "wall" or s.boundary.kind != "exterior":
            return s
        d = cardinal(s.azimuth - model.orientation)
        if d not in fr:
            return s
        template = s.glazings[0] if s.glazings else Glazing(1.0)
        area = fr[d] * s.gross_area
        glz = (replace(template, area=area),) if area > 0 else ()
        return replace(s, glazings=glz)

    return _map_surfaces(model, apply)


def _check_thickness(thickness):
    if not (math.isfinite(thickness) and thickness >= 0):
        raise ModelError(f"insulation thickness must be >= 0, got {thickness!r}")


def add_roof_insulation(model: BuildingModel, material: Material, thickness: float) -> BuildingModel:
    """Add an innermost insulation layer to every roof."""
    _check_thickness(thickness)
    if thickness == 0:
        return model
    layer = Layer(material, thickness)

    def apply(s):
        if s.kind != "roof":
            return s
        return replace(s, construction=replace(s.construction,
                                               layers=s.construction.layers + (layer,)))

    return _map_surfaces(model, apply)


def add_wall_insulation(model: BuildingModel, material: Material, thickness: float,
                        face: str = "interior") -> BuildingModel:
    """Line every exterior wall with an insulation layer on the given face."""
    if face not in ("interior", "exterior"):
        raise ModelError(f"face must be 'interior' or 'exterior', got {face!r}")
    _check_thickness(thickness)
    if thickness == 0:
        return model
    layer = Layer(material, thickness)

    def apply(s):
        if s.kind != "wall" or s.boundary.kind != "exterior":
            return s
        layers = s.construction.layers
        layers = layers + (layer,) if face == "interior" else (layer,) + layers
        return replace(s, construction=replace(s.construction, layers=layers))

    return _map_surfaces(model, apply)


def set_floor_absorptance(model: BuildingModel, alpha: float) -> BuildingModel:
    if not (isinstance(alpha, (int, float)) and 0 < alpha <= 1):
        raise ModelError(f"floor absorptance must lie in (0, 1], got {alpha!r}")

    def apply(s):
        if s.kind != "floor":
            return s
        return replace(s, construction=replace(s.construction, exterior_absorptance=alpha))

    return _map_surfaces(model, apply)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(model: BuildingModel) -> list:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    names = [z.name for z in model.zones]
    if not names:
        problems.append("model has no zones")
    seen = set()
    for n in names:
        if n in seen:
            problems.append(f"duplicate zone name {n!r}")
        seen.add(n)
    zone_set = set(names)

    surface_names = set()
    for z in model.zones:
        if not (math.isfinite(z.volume) and z.volume > 0):
            problems.append(f"zone {z.name}: volume must be positive")
        floors = [s for s in z.surfaces if s.kind == "floor" and s.boundary.kind == "ground"]
        if len(floors) != 1:
            problems.append(f"zone {z.name}: expected exactly one ground floor, found {len(floors)}")
        try:
            fs = z.surface(z.floor_surface)
            if fs.kind != "floor" or fs.boundary.kind != "ground":
                problems.append(f"zone {z.name}: floor_surface {z.floor_surface!r} "
                                "is not a ground floor")
        except KeyError:
            problems.append(f"zone {z.name}: floor_surface {z.floor_surface!r} not found")
        for s in z.surfaces:
            label = f"surface {s.name} (zone {z.name})"
            if s.name in surface_names:
                problems.append(f"{label}: duplicate surface name")
            surface_names.add(s.name)
            if not (math.isfinite(s.gross_area) and s.gross_area > 0):
                problems.append(f"{label}: gross_area must be positive")
            elif s.glazed_area >= s.gross_area:
                problems.append(f"{label}: glazing area {s.glazed_area:.4g} m2 is not "
                                f"smaller than gross area {s.gross_area:.4g} m2")
            if s.boundary.kind == "zone":
                other = s.boundary.zone
                if s.glazings:
                    problems.append(f"{label}: interior partitions cannot carry glazing")
                if other == z.name:
                    problems.append(f"{label}: partition refers to its own zone")
                elif other not in zone_set:
                    problems.append(f"{label}: boundary zone {other!r} does not exist")
            if s.glazings and s.boundary.kind in ("ground", "adiabatic"):
                problems.append(f"{label}: only exterior surfaces can carry glazing")
        for o in z.openings:
            a, b = o.connects
            if a == b:
                problems.append(f"opening {o.name}: connects a node to itself")
            for node in (a, b):
                if node != EXTERIOR and node not in zone_set:
                    problems.append(f"opening {o.name}: unknown node {node!r}")

    # connectivity of the airflow graph
    adj = {n: set() for n in names}
    adj[EXTERIOR] = set()
    for o in model.openings():
        a, b = o.connects
        if a in adj and b in adj and a != b:
            adj[a].add(b)
            adj[b].add(a)
    reached = {EXTERIOR}
    queue = deque([EXTERIOR])
    while queue:
        for nxt in adj[queue.popleft()]:
            if nxt not in reached:
                reached.add(nxt)
                queue.append(nxt)
    for n in names:
        if n not in reached:
            problems.append(f"zone {n}: no opening path to the exterior")
    return problems


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _material_to_dict(m: Material) -> dict:
    d = {"name": m.name, "conductivity": m.conductivity, "density": m.density,
         "specific_heat": m.specific_heat}
    if m.resistive_only:
        d["resistive_only"] = True
    return d


def model_to_dict(model: BuildingModel) -> dict:
    def construction(c: Construction):
        return {"layers": [{"material": _material_to_dict(l.material), "thickness": l.thickness}
                           for l in c.layers],
                "exterior_absorptance": c.exterior_absorptance,
                "exterior_emissivity": c.exterior_emissivity,
                "interior_emissivity": c.interior_emissivity}

    def surface(s: Surface):
        b = {"kind": s.boundary.kind}
        if s.boundary.zone is not None:
            b["zone"] = s.boundary.zone
        return {"name": s.name, "kind": s.kind, "gross_area": s.gross_area, "tilt": s.tilt,
                "azimuth": s.azimuth, "construction": construction(s.construction),
                "boundary": b,
                "glazings": [{"area": g.area, "u_value": g.u_value, "shgc": g.shgc}
                             for g in s.glazings]}

    def opening(o: Opening):
        d = {"name": o.name, "connects": list(o.connects),
             "flow_coefficient": o.flow_coefficient, "exponent": o.exponent,
             "height": o.height}
        if o.azimuth is not None:
            d["azimuth"] = o.azimuth
        return d

    s = model.site
    return {
        "site": {"latitude": s.latitude, "longitude": s.longitude,
                 "utc_offset": s.utc_offset, "ground_albedo": s.ground_albedo},
        "orientation": model.orientation,
        "zones": [{"name": z.name, "volume": z.volume, "floor_surface": z.floor_surface,
                   "surfaces": [surface(x) for x in z.surfaces],
                   "openings": [opening(o) for o in z.openings]} for z in model.zones],
    }


class _PathError(ModelError):
    pass


class _Reader:
    """Builds objects from nested dicts, reporting errors with a field path."""

    def __init__(self):
        self.path = []

    def where(self):
        return "".join(self.path).lstrip(".") or "<root>"

    def get(self, d, key, default=...):
        if not isinstance(d, dict):
            raise _PathError(f"{self.where()}: expected an object")
        if key not in d:
            if default is ...:
                raise _PathError(f"{self.where()}: missing field '{key}'")
            return default
        return d[key]

    def build(self, label, fn, *args):
        self.path.append(label)
        try:
            return fn(*args)
        except _PathError:
            raise
        except (ModelError, TypeError, ValueError, KeyError) as exc:
            raise _PathError(f"{self.where()}: {exc}") from None
        finally:
            self.path.pop()


def model_from_dict(data: dict) -> BuildingModel:
    r = _Reader()

    def material(d):
        return Material(r.get(d, "name"), float(r.get(d, "conductivity")),
                        float(r.get(d, "density")), float(r.get(d, "specific_heat")),
                        bool(r.get(d, "resistive_only", False)))

    def layer(d):
        mat = r.build(".material", material, r.get(d, "material"))
        return r.build(".thickness", lambda: Layer(mat, float(r.get(d, "thickness"))))

    def construction(d):
        layers = [r.build(f".layers[{i}]", layer, x) for i, x in enumerate(r.get(d, "layers"))]
        return Construction(tuple(layers), float(r.get(d, "exterior_absorptance", 0.7)),
                            float(r.get(d, "exterior_emissivity", 0.9)),
                            float(r.get(d, "interior_emissivity", 0.9)))

    def glazing(d):
        return Glazing(float(r.get(d, "area")), float(r.get(d, "u_value", 5.8)),
                       float(r.get(d, "shgc", 0.85)))

    def boundary(d):
        return Boundary(r.get(d, "kind"), r.get(d, "zone", None))

    def surface(d):
        cons = r.build(".construction", construction, r.get(d, "construction"))
        bnd = r.build(".boundary", boundary, r.get(d, "boundary"))
        glz = tuple(r.build(f".glazings[{i}]", glazing, g)
                    for i, g in enumerate(r.get(d, "glazings", [])))
        return Surface(r.get(d, "name"), r.get(d, "kind"), float(r.get(d, "gross_area")),
                       float(r.get(d, "tilt")), float(r.get(d, "azimuth")), cons, bnd, glz)

    def opening(d):
        az = r.get(d, "azimuth", None)
        return Opening(r.get(d, "name"), tuple(r.get(d, "connects")),
                       float(r.get(d, "flow_coefficient")), float(r.get(d, "exponent")),
                       float(r.get(d, "height")), None if az is None else float(az))

    def zone(d):
        surfaces = tuple(r.build(f".surfaces[{i}]", surface, s)
                         for i, s in enumerate(r.get(d, "surfaces")))
        openings = tuple(r.build(f".openings[{i}]", opening, o)
                         for i, o in enumerate(r.get(d, "openings", [])))
        return Zone(r.get(d, "name"), float(r.get(d, "volume")), surfaces, openings,
                    r.get(d, "floor_surface", ""))

    def site(d):
        return SiteInfo(float(r.get(d, "latitude")), float(r.get(d, "longitude")),
                        float(r.get(d, "utc_offset")), float(r.get(d, "ground_albedo", 0.2)))

    def root(d):
        s = r.build(".site", site, r.get(d, "site"))
        zones = tuple(r.build(f".zones[{i}]", zone, z) for i, z in enumerate(r.get(d, "zones")))
        return BuildingModel(s, zones, float(r.get(d, "orientation", 0.0)) % 360.0)

    return r.build("", root, data)


def dumps(model: BuildingModel) -> str:
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def loads(text: str) -> BuildingModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc}") from None
    return model_from_dict(data)
