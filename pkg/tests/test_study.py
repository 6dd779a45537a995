import json
import re

import pytest

from passivesim import building as b
from passivesim.errors import InputError
from passivesim.study import (BASELINE, GLAZING_SETS, REPORT_HEADER, THICKNESSES_CM, Scenario,
                              Transformation, builtin_scenarios, emit_report, run_study,
                              scenarios_from_json, sweep_chart)
from passivesim.weather import SiteInfo, synth_weather


@pytest.fixture(scope="module")
def short_weather():
    return synth_weather(SiteInfo(), 2, 5.6, 20.6, 0.7, 80.0, 2.0)


def _straw(cm):
    return Scenario(f"straw_{cm}", (Transformation.of("add_roof_insulation", material="straw",
                                                      thickness=cm / 100),),
                    group="straw_roof", parameter=float(cm))


@pytest.fixture(scope="module")
def sweep_report(short_weather):
    scenarios = [_straw(cm) for cm in THICKNESSES_CM]
    scenarios.append(Scenario("too_much_glass", (Transformation.of(
        "set_glazing_fractions", fractions={"N": 0.95}),)))
    return run_study(b.typical_house(), scenarios, short_weather)


# ---------------------------------------------------------------- the builtin matrix

def test_builtin_matrix_contents():
    scenarios = builtin_scenarios()
    names = [s.name for s in scenarios]
    assert len(names) == len(set(names)) == 26
    by_name = {s.name: s for s in scenarios}
    assert by_name["0"].transformations == ()
    assert [n for n in names if n in GLAZING_SETS or n == "0"] == list("0123456")
    assert dict(by_name["6"].transformations[0].args)["fractions"] == {
        "N": 0.30, "E": 0.30, "S": 0.10, "W": 0.20}
    combined = [t.to_dict() for t in by_name["combined"].transformations]
    assert {"op": "add_roof_insulation", "material": "straw", "thickness": 0.15} in combined
    assert {"op": "add_wall_insulation", "material": "torchi", "thickness": 0.15,
            "face": "interior"} in combined
    for group in ("straw_roof", "torchi_wall"):
        params = [s.parameter for s in scenarios if s.group == group]
        assert params == [float(cm) for cm in THICKNESSES_CM]
    assert [s.parameter for s in scenarios if s.group == "orientation"] == [0, 90, 180, 270]
    assert [s.parameter for s in scenarios if s.group == "floor_absorptance"] == [0.75, 0.9]


def test_builtin_scenarios_build_valid_models(house):
    for s in builtin_scenarios():
        assert b.validate(s.build(house)) == [], s.name


# ---------------------------------------------------------------- matrix JSON

def test_matrix_json_forms():
    assert len(scenarios_from_json('"builtin"')) == 26
    assert len(scenarios_from_json('["builtin"]')) == 26
    custom = scenarios_from_json(json.dumps({"scenarios": [
        {"name": "north", "transformations": [{"op": "rotate", "degrees": 90}]}]}))
    assert custom == [Scenario("north", (Transformation.of("rotate", degrees=90),))]


def test_matrix_round_trip():
    text = json.dumps([s.to_dict() for s in builtin_scenarios()])
    assert scenarios_from_json(text) == builtin_scenarios()


@pytest.mark.parametrize("text", [
    '[{"name": "x", "transformations": [{"op": "paint", "colour": "red"}]}]',
    '[{"name": "x"}, {"name": "x"}]',
    '[{"name": "baseline"}]',
    '[{"transformations": []}]',
    '{not json',
    '42',
])
def test_matrix_json_errors(text):
    with pytest.raises(InputError):
        scenarios_from_json(text)


def test_bad_transformation_arguments(house):
    with pytest.raises(InputError):
        Transformation.of("rotate", angle=3).apply(house)
    with pytest.raises(InputError):
        Transformation.of("add_roof_insulation", material="gold", thickness=0.1).apply(house)


# ---------------------------------------------------------------- running

def test_empty_study_has_baseline_only(house, short_weather):
    report = run_study(house, [], short_weather)
    assert report.results == []
    lines = report.to_csv().splitlines()
    assert lines[0] == REPORT_HEADER
    assert len(lines) == 1 + 6 and all(line.startswith(BASELINE + ",") for line in lines[1:])


def test_failed_scenario_is_reported(sweep_report):
    failed = sweep_report.result("too_much_glass")
    assert failed.failed and "0.95" in failed.error
    assert [r.scenario.name for r in sweep_report.failures] == ["too_much_glass"]
    rows = [r for r in sweep_report.to_csv().splitlines() if r.startswith("too_much_glass,")]
    assert len(rows) == 6 and all(",failed,failed," in r for r in rows)


def test_zero_thickness_equals_baseline(sweep_report):
    for z in sweep_report.baseline.zone_names:
        day, night = sweep_report.delta("straw_0", z)
        assert abs(day) < 1e-9 and abs(night) < 1e-9


def test_baseline_self_delta_is_zero(sweep_report):
    for row in sweep_report.to_csv().splitlines()[1:7]:
        cells = row.split(",")
        assert cells[0] == BASELINE and cells[4] == cells[5] == "0.0000"


def test_straw_sweep_monotone_for_bedrooms(sweep_report):
    for zone in ("bedroom1", "bedroom2"):
        nights = [sweep_report.summary(f"straw_{cm}")[zone].t_res_night for cm in THICKNESSES_CM]
        assert all(b2 >= a2 for a2, b2 in zip(nights, nights[1:])), nights


def _rows_by_scenario(csv_text):
    rows = {}
    for line in csv_text.splitlines()[1:]:
        rows.setdefault(line.split(",")[0], []).append(line)
    return rows


def test_order_and_removal_do_not_change_rows(house, short_weather):
    a, c, d = _straw(5), _straw(15), Scenario("rot", (Transformation.of("rotate", degrees=90),))
    forward = _rows_by_scenario(run_study(house, [a, c, d], short_weather).to_csv())
    backward = _rows_by_scenario(run_study(house, [d, c, a], short_weather).to_csv())
    fewer = _rows_by_scenario(run_study(house, [d, a], short_weather).to_csv())
    assert forward == backward
    assert {k: forward[k] for k in fewer} == fewer


def test_parallel_matches_sequential(house, short_weather):
    scenarios = [_straw(5), _straw(10), Scenario("rot", (Transformation.of("rotate", degrees=90),))]
    one = run_study(house, scenarios, short_weather, threads=1).to_csv()
    many = run_study(house, scenarios, short_weather, threads=3).to_csv()
    assert one == many


def test_invalid_inputs(house, short_weather):
    with pytest.raises(InputError):
        run_study(house, [_straw(5), _straw(5)], short_weather)
    with pytest.raises(InputError):
        run_study(house, [], short_weather, threads=0)


# ---------------------------------------------------------------- reports

def test_csv_output(sweep_report, tmp_path):
    [path] = emit_report(sweep_report, "csv", tmp_path)
    assert path.name == "report.csv"
    assert path.read_text() == sweep_report.to_csv()
    other = tmp_path / "named.csv"
    assert emit_report(sweep_report, "csv", other) == [other]


def test_sweep_chart_has_one_polyline_per_zone(sweep_report):
    svg = sweep_chart(sweep_report, "straw_roof", "night")
    lines = re.findall(r'<polyline class="zone"[^>]*points="([^"]*)"', svg)
    assert len(lines) == 6
    assert all(len(points.split()) == len(THICKNESSES_CM) for points in lines)


def test_svg_output(sweep_report, tmp_path):
    written = emit_report(sweep_report, "svg", tmp_path / "charts")
    names = sorted(p.name for p in written)
    assert names == ["discomfort_baseline.svg", "sweep_straw_roof_day.svg",
                     "sweep_straw_roof_night.svg"]
    assert all(p.read_text().startswith("<svg") for p in written)


def test_unwritable_destination(sweep_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(InputError):
        emit_report(sweep_report, "svg", blocker / "sub")
    with pytest.raises(InputError):
        emit_report(sweep_report, "pdf", tmp_path)
