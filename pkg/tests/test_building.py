import json
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from passivesim import building as b
from passivesim.errors import InputError, ModelError

ROOF_R = 0.015 / 0.60 + 0.17 / 0.85 + 0.005 / 0.29


def _surface(model, name):
    for _, s in model.surfaces():
        if s.name == name:
            return s
    raise KeyError(name)


def _ext_walls(model):
    return [s for _, s in model.surfaces() if s.kind == "wall" and s.boundary.kind == "exterior"]


# ---------------------------------------------------------------- typical house

def test_typical_house_zones(house):
    assert house.zone_names == ["bedroom1", "bedroom2", "living_room", "kitchen",
                                "bathroom", "toilet"]
    assert b.validate(house) == []


def test_documented_facades(house):
    east = _surface(house, "bedroom1_wall_e")
    assert east.gross_area == pytest.approx(7.308)
    assert east.glazed_area == pytest.approx(1.26)
    assert _surface(house, "living_room_wall_n").azimuth == 0.0


def test_constructions(house):
    wall = _surface(house, "bedroom1_wall_s").construction
    assert wall.resistance == pytest.approx(0.22 / 0.69)
    assert wall.resistance == pytest.approx(0.3188, abs=1e-4)
    roof = _surface(house, "bedroom1_roof").construction
    assert roof.resistance == pytest.approx(ROOF_R, rel=1e-12)
    assert roof.resistance == pytest.approx(0.2422, abs=1e-4)
    door = _surface(house, "kitchen_door_e").construction
    assert door.resistance == pytest.approx(0.035 / 0.16)


def test_every_zone_has_cracks_to_exterior_and_neighbours(house):
    for z in house.zones:
        ext = [o for o in z.openings if b.EXTERIOR in o.connects]
        assert ext, z.name
    zone_links = {frozenset(o.connects) for o in house.openings() if b.EXTERIOR not in o.connects}
    assert all("living_room" in pair for pair in zone_links)
    assert len(zone_links) == 5


# ---------------------------------------------------------------- rotate

def test_rotate_identity_and_involution(house):
    assert b.rotate(house, 0) == house
    assert b.rotate(b.rotate(house, 180), 180) == house


def test_rotate_north_to_south(house):
    turned = b.rotate(house, 180)
    assert _surface(turned, "living_room_wall_n").azimuth == 180.0
    assert turned.orientation == 180.0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([0.0, 45.0, 90.0, 135.0, 180.0, 270.0, 315.0]))
def test_rotate_preserves_everything_but_azimuth(deg):
    house = b.typical_house()
    turned = b.rotate(house, deg)
    for (z0, s0), (z1, s1) in zip(house.surfaces(), turned.surfaces()):
        assert z0.volume == z1.volume
        assert replace(s1, azimuth=s0.azimuth) == s0
        assert s1.azimuth == pytest.approx((s0.azimuth + deg) % 360)
    assert b.validate(turned) == []


# ---------------------------------------------------------------- glazing

ROW6 = {"N": 0.30, "E": 0.30, "S": 0.10, "W": 0.20}


def test_glazing_row6_on_east_facade(house):
    m = b.set_glazing_fractions(house, ROW6)
    assert _surface(m, "bedroom1_wall_e").glazed_area == pytest.approx(0.30 * 7.308)
    assert _surface(m, "bedroom1_wall_e").glazed_area == pytest.approx(2.1924)


def test_glazing_all_zero(house):
    m = b.set_glazing_fractions(house, {"N": 0, "E": 0, "S": 0, "W": 0})
    assert all(s.glazed_area == 0 for _, s in m.surfaces())
    assert b.validate(m) == []


def test_glazing_fraction_limit(house):
    with pytest.raises(ModelError):
        b.set_glazing_fractions(house, {"N": 0.95})
    with pytest.raises(ModelError):
        b.set_glazing_fractions(house, {"up": 0.1})


def test_glazing_uses_unrotated_facade(house):
    m = b.set_glazing_fractions(b.rotate(house, 90), {"N": 0.3, "E": 0.0, "S": 0.0, "W": 0.0})
    north = _surface(m, "living_room_wall_n")
    assert north.azimuth == 90.0
    assert north.glazed_area == pytest.approx(0.3 * north.gross_area)


def test_glazing_idempotent(house):
    once = b.set_glazing_fractions(house, ROW6)
    assert b.set_glazing_fractions(once, ROW6) == once


# ---------------------------------------------------------------- insulation

def test_roof_insulation(house):
    assert b.add_roof_insulation(house, b.STRAW, 0) is house
    m = b.add_roof_insulation(house, b.STRAW, 0.15)
    roof = _surface(m, "bedroom1_roof").construction
    assert len(roof.layers) == 4
    assert roof.layers[-1] == b.Layer(b.STRAW, 0.15)
    assert roof.resistance == pytest.approx(ROOF_R + 0.15 / b.STRAW.conductivity)


def test_wall_insulation(house):
    assert b.add_wall_insulation(house, b.TORCHI, 0.0) is house
    m = b.add_wall_insulation(house, b.TORCHI, 0.15, "interior")
    for s0, s1 in zip(_ext_walls(house), _ext_walls(m)):
        assert s1.construction.layers[-1] == b.Layer(b.TORCHI, 0.15)
        assert s1.construction.resistance - s0.construction.resistance == pytest.approx(
            0.15 / b.TORCHI.conductivity)
    ext = b.add_wall_insulation(house, b.TORCHI, 0.15, "exterior")
    assert _ext_walls(ext)[0].construction.layers[0] == b.Layer(b.TORCHI, 0.15)
    # doors and partitions are untouched
    assert _surface(m, "kitchen_door_e") == _surface(house, "kitchen_door_e")
    assert _surface(m, "bedroom1_part_toilet") == _surface(house, "bedroom1_part_toilet")


def test_insulation_errors(house):
    with pytest.raises(ModelError):
        b.add_roof_insulation(house, b.STRAW, -0.01)
    with pytest.raises(ModelError):
        b.add_wall_insulation(house, b.TORCHI, 0.1, "middle")


def test_floor_absorptance(house):
    for alpha in (0.75, 0.9):
        m = b.set_floor_absorptance(house, alpha)
        floors = [s for _, s in m.surfaces() if s.kind == "floor"]
        assert all(s.construction.exterior_absorptance == alpha for s in floors)
    with pytest.raises(ModelError):
        b.set_floor_absorptance(house, 0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.3), st.floats(0, 0.3), st.sampled_from([0.0, 90.0, 180.0, 270.0]))
def test_transformations_pure_and_commute_with_rotate(t_roof, t_wall, deg):
    house = b.typical_house()
    snapshot = b.dumps(house)
    a = b.rotate(b.add_wall_insulation(b.add_roof_insulation(house, b.STRAW, t_roof),
                                       b.TORCHI, t_wall), deg)
    c = b.add_wall_insulation(b.add_roof_insulation(b.rotate(house, deg), b.STRAW, t_roof),
                              b.TORCHI, t_wall)
    assert a == c
    assert b.validate(a) == []
    assert b.dumps(house) == snapshot


# ---------------------------------------------------------------- validation

def test_validate_oversized_glazing(house):
    bad = b._map_surfaces(house, lambda s: replace(s, glazings=(b.Glazing(50.0),))
                          if s.name == "bedroom1_wall_e" else s)
    problems = b.validate(bad)
    assert len(problems) == 1 and "bedroom1_wall_e" in problems[0]


def test_validate_disconnected_zone(house):
    z = house.zone("toilet")
    cut = replace(z, openings=())
    others = tuple(replace(o, openings=tuple(op for op in o.openings if "toilet" not in op.connects))
                   for o in house.zones if o.name != "toilet")
    model = replace(house, zones=others + (cut,))
    problems = b.validate(model)
    assert any("toilet" in p and "exterior" in p for p in problems)


def test_validate_unknown_boundary_zone(house):
    bad = b._map_surfaces(house, lambda s: replace(s, boundary=b.Boundary.to_zone("attic"))
                          if s.name == "bedroom1_part_toilet" else s)
    assert any("attic" in p for p in b.validate(bad))


def test_constructor_invariants():
    with pytest.raises(ModelError):
        b.Layer(b.STRAW, 0.0)
    with pytest.raises(ModelError):
        b.Material("x", -1, 1, 1)
    with pytest.raises(ModelError):
        b.Glazing(1.0, shgc=1.5)
    with pytest.raises(ModelError):
        b.Opening("o", ("a", "b"), 0.01, 0.3, 1.0)


# ---------------------------------------------------------------- JSON

def test_json_round_trip(house):
    m = b.rotate(b.add_roof_insulation(house, b.STRAW, 0.1), 90)
    assert b.loads(b.dumps(m)) == m


def test_json_error_names_field_path(house):
    data = json.loads(b.dumps(house))
    data["zones"][0]["surfaces"][0]["construction"]["layers"][0]["thickness"] = -0.2
    with pytest.raises(InputError) as info:
        b.loads(json.dumps(data))
    msg = str(info.value)
    assert "zones[0]" in msg and "thickness" in msg


def test_json_rejects_garbage():
    with pytest.raises(InputError):
        b.loads("{not json")
    with pytest.raises(InputError):
        b.loads("[]")


def test_shipped_example_matches_constructor():
    from pathlib import Path
    text = (Path(__file__).parent.parent / "docs" / "typical_house.json").read_text()
    assert b.loads(text) == b.typical_house()
