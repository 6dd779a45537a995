"""Parametric scenario studies over the typical house.

A scenario is an ordered list of building transformations. The study
runs the unmodified building once as the reference, runs every scenario
independently (optionally in worker processes), and reports each zone's
day and night resultant temperature, its difference from the reference
and the discomfort hours.
"""

from __future__ import annotations

import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union
from xml.sax.saxutils import escape

from . import building
from .building import BuildingModel
from .comfort import ComfortSummary, ComfortThresholds, discomfort_hours
from .errors import InputError, SimulationError
from .solver import SimConfig, simulate
from .weather import TypicalSequence, WeatherSeries

REPORT_HEADER = ("scenario,zone,t_res_day_c,t_res_night_c,d_day_c,d_night_c,"
                 "discomfort_day_h,discomfort_night_h")
BASELINE = "baseline"

GLAZING_SETS = {
    "1": {"N": 0.10, "E": 0.10, "S": 0.10, "W": 0.10},
    "2": {"N": 0.20, "E": 0.20, "S": 0.20, "W": 0.20},
    "3": {"N": 0.30, "E": 0.30, "S": 0.30, "W": 0.30},
    "4": {"N": 0.30, "E": 0.30, "S": 0.20, "W": 0.30},
    "5": {"N": 0.30, "E": 0.30, "S": 0.10, "W": 0.30},
    "6": {"N": 0.30, "E": 0.30, "S": 0.10, "W": 0.20},
}
ORIENTATIONS = (0, 90, 180, 270)
FLOOR_ABSORPTANCES = (0.75, 0.9)
THICKNESSES_CM = (0, 5, 10, 15, 20, 25)
SOUTHWARD = 180.0


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def _rotate(model, degrees):
    return building.rotate(model, float(degrees))


def _glazing(model, fractions):
    if not isinstance(fractions, Mapping):
        raise InputError("set_glazing_fractions needs a mapping of direction to fraction")
    return building.set_glazing_fractions(model, fractions)


def _material(name):
    try:
        return building.MATERIALS[name]
    except KeyError:
        raise InputError(f"unknown material {name!r}") from None


def _roof(model, material, thickness):
    return building.add_roof_insulation(model, _material(material), float(thickness))


def _wall(model, material, thickness, face="interior"):
    return building.add_wall_insulation(model, _material(material), float(thickness), face)


def _floor(model, alpha):
    return building.set_floor_absorptance(model, float(alpha))


OPERATIONS = {
    "rotate": _rotate,
    "set_glazing_fractions": _glazing,
    "add_roof_insulation": _roof,
    "add_wall_insulation": _wall,
    "set_floor_absorptance": _floor,
}


@dataclass(frozen=True)
class Transformation:
    op: str
    args: tuple = ()  # (name, value) pairs, kept hashable and ordered

    def __post_init__(self):
        if self.op not in OPERATIONS:
            raise InputError(f"unknown transformation {self.op!r}; expected one of "
                             + ", ".join(sorted(OPERATIONS)))

    @classmethod
    def of(cls, op: str, **kwargs) -> "Transformation":
        return cls(op, tuple(kwargs.items()))

    def apply(self, model: BuildingModel) -> BuildingModel:
        try:
            return OPERATIONS[self.op](model, **dict(self.args))
        except TypeError as exc:
            raise InputError(f"bad arguments for {self.op}: {exc}") from None

    def to_dict(self) -> dict:
        return {"op": self.op, **dict(self.args)}


@dataclass(frozen=True)
class Scenario:
    name: str
    transformations: tuple = ()
    group: Optional[str] = None      # sweep this scenario belongs to, if any
    parameter: Optional[float] = None

    def build(self, base: BuildingModel) -> BuildingModel:
        model = base
        for t in self.transformations:
            model = t.apply(model)
        return model

    def to_dict(self) -> dict:
        out = {"name": self.name, "transformations": [t.to_dict() for t in self.transformations]}
        if self.group is not None:
            out["group"] = self.group
            out["parameter"] = self.parameter
        return out


def _glazing_step(number: str) -> Transformation:
    return Transformation.of("set_glazing_fractions", fractions=GLAZING_SETS[number])


def builtin_scenarios() -> list:
    """The full parametric matrix: glazing sets, orientations, floor
    absorptance, roof and wall insulation sweeps and the combined package."""
    out = [Scenario("0")]
    out += [Scenario(k, (_glazing_step(k),)) for k in GLAZING_SETS]
    for deg in ORIENTATIONS:
        out.append(Scenario(f"orient_{deg}", (Transformation.of("rotate", degrees=deg),
                                              _glazing_step("6")),
                            group="orientation", parameter=float(deg)))
    for alpha in FLOOR_ABSORPTANCES:
        out.append(Scenario(f"floor_alpha_{alpha:g}",
                            (Transformation.of("rotate", degrees=SOUTHWARD), _glazing_step("6"),
                             Transformation.of("set_floor_absorptance", alpha=alpha)),
                            group="floor_absorptance", parameter=alpha))
    for cm in THICKNESSES_CM:
        out.append(Scenario(f"straw_roof_{cm}", (Transformation.of(
            "add_roof_insulation", material="straw", thickness=cm / 100),),
            group="straw_roof", parameter=float(cm)))
    for cm in THICKNESSES_CM:
        out.append(Scenario(f"torchi_wall_{cm}", (Transformation.of(
            "add_wall_insulation", material="torchi", thickness=cm / 100, face="interior"),),
            group="torchi_wall", parameter=float(cm)))
    out.append(Scenario("combined", (
        Transformation.of("rotate", degrees=SOUTHWARD), _glazing_step("6"),
        Transformation.of("add_roof_insulation", material="straw", thickness=0.15),
        Transformation.of("add_wall_insulation", material="torchi", thickness=0.15,
                          face="interior"))))
    return out


def scenarios_from_json(text: str) -> list:
    """Parse a study matrix.

    The document is either the string ``"builtin"``, or a list whose
    items are ``"builtin"`` (the whole builtin matrix) or objects
    ``{"name": ..., "transformations": [{"op": ..., <arguments>}, ...]}``,
    optionally with ``group`` and ``parameter``. A top-level object with a
    ``scenarios`` key is also accepted.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid study matrix JSON: {exc}") from None
    if isinstance(data, dict):
        data = data.get("scenarios")
    if data == "builtin":
        return builtin_scenarios()
    if not isinstance(data, list):
        raise InputError("study matrix must be 'builtin' or a list of scenarios")
    out = []
    for i, item in enumerate(data):
        if item == "builtin":
            out += builtin_scenarios()
            continue
        if not isinstance(item, dict) or "name" not in item:
            raise InputError(f"scenarios[{i}]: expected an object with a name")
        steps = []
        for j, t in enumerate(item.get("transformations", [])):
            if not isinstance(t, dict) or "op" not in t:
                raise InputError(f"scenarios[{i}].transformations[{j}]: expected an object with 'op'")
            args = {k: v for k, v in t.items() if k != "op"}
            try:
                steps.append(Transformation(t["op"], tuple(args.items())))
            except InputError as exc:
                raise InputError(f"scenarios[{i}].transformations[{j}]: {exc}") from None
        param = item.get("parameter")
        out.append(Scenario(str(item["name"]), tuple(steps), item.get("group"),
                            None if param is None else float(param)))
    _check_unique(out)
    return out


def _check_unique(scenarios: Sequence[Scenario]):
    seen = set()
    for s in scenarios:
        if s.name in seen or s.name == BASELINE:
            raise InputError(f"duplicate or reserved scenario name {s.name!r}")
        seen.add(s.name)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    scenario: Scenario
    summary: Optional[ComfortSummary] = None
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.summary is None


@dataclass
class StudyReport:
    baseline: ComfortSummary
    results: list = field(default_factory=list)  # ScenarioResult, in scenario order

    def result(self, name: str) -> ScenarioResult:
        for r in self.results:
            if r.scenario.name == name:
                return r
        raise KeyError(name)

    def summary(self, name: str) -> ComfortSummary:
        if name == BASELINE:
            return self.baseline
        r = self.result(name)
        if r.failed:
            raise KeyError(f"scenario {name!r} failed: {r.error}")
        return r.summary

    def delta(self, name: str, zone: str) -> tuple:
        """(day, night) resultant temperature difference versus the baseline."""
        s, b = self.summary(name)[zone], self.baseline[zone]
        return _diff(s.t_res_day, b.t_res_day), _diff(s.t_res_night, b.t_res_night)

    @property
    def failures(self) -> list:
        return [r for r in self.results if r.failed]

    def rows(self) -> list:
        out = [(BASELINE, self.baseline)]
        out += [(r.scenario.name, r.summary) for r in self.results]
        return out

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(REPORT_HEADER + "\n")
        for name, summary in self.rows():
            if summary is None:
                for z in self.baseline.zones:
                    out.write(f"{name},{z.zone},failed,failed,,,,\n")
                continue
            for z in summary.zones:
                b = self.baseline[z.zone]
                d_day = _diff(z.t_res_day, b.t_res_day)
                d_night = _diff(z.t_res_night, b.t_res_night)
                out.write(f"{name},{z.zone},{_fmt(z.t_res_day)},{_fmt(z.t_res_night)},"
                          f"{_fmt(d_day)},{_fmt(d_night)},"
                          f"{z.discomfort_hours_day},{z.discomfort_hours_night}\n")
        return out.getvalue()


def _diff(a, b):
    return None if a is None or b is None else a - b


def _fmt(v):
    return "" if v is None else f"{v:.4f}"


def _evaluate(model, weather, config, thresholds) -> ComfortSummary:
    return discomfort_hours(simulate(model, weather, config), thresholds)


def _run_one(args) -> tuple:
    scenario, base, weather, config, thresholds = args
    try:
        model = scenario.build(base)
        problems = building.validate(model)
        if problems:
            raise InputError("; ".join(problems))
        return _evaluate(model, weather, config, thresholds), None
    except (InputError, SimulationError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_study(base: BuildingModel, scenarios: Sequence[Scenario],
              weather: Union[WeatherSeries, TypicalSequence], config: Optional[SimConfig] = None,
              thresholds: ComfortThresholds = ComfortThresholds(), threads: int = 1) -> StudyReport:
    """Evaluate ``base`` and every scenario; failures are recorded, not raised.

    ``threads`` > 1 evaluates scenarios in that many worker processes. Each
    scenario is a pure function of its inputs, so the report does not
    depend on the degree of parallelism.
    """
    config = config or SimConfig()
    if isinstance(weather, TypicalSequence):
        weather = weather.as_series()
    problems = building.validate(base)
    if problems:
        raise InputError("invalid base building: " + "; ".join(problems))
    _check_unique(scenarios)
    if threads < 1:
        raise InputError(f"threads must be >= 1, got {threads}")
    baseline = _evaluate(base, weather, config, thresholds)
    jobs = [(s, base, weather, config, thresholds) for s in scenarios]
    if threads == 1 or len(jobs) <= 1:
        outcomes = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    results = [ScenarioResult(s, summary, err) for s, (summary, err) in zip(scenarios, outcomes)]
    return StudyReport(baseline, results)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
            "#e377c2", "#7f7f7f")


def _svg_frame(width, height, title, body, x_label, y_label) -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<rect width="{width}" height="{height}" fill="white"/>\n'
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">'
            f'{escape(title)}</text>\n'
            f'<text x="{width / 2:.1f}" y="{height - 6}" text-anchor="middle" font-size="11">'
            f'{escape(x_label)}</text>\n'
            f'<text x="14" y="{height / 2:.1f}" font-size="11" text-anchor="middle" '
            f'transform="rotate(-90 14 {height / 2:.1f})">{escape(y_label)}</text>\n'
            + body + "</svg>\n")


def _nice_range(values):
    lo, hi = min(values), max(values)
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def sweep_chart(report: StudyReport, group: str, metric: str = "night") -> Optional[str]:
    """Line chart of each zone's resultant temperature across a sweep group."""
    members = [r for r in report.results if r.scenario.group == group and not r.failed]
    if not members:
        return None
    members.sort(key=lambda r: r.scenario.parameter)
    xs = [r.scenario.parameter for r in members]
    attr = "t_res_night" if metric == "night" else "t_res_day"
    zones = report.baseline.zone_names
    series = {}
    for z in zones:
        ys = [getattr(r.summary[z], attr) for r in members]
        if all(y is not None for y in ys):
            series[z] = ys
    if not series:
        return None
    w, h, left, right, top, bottom = 640, 400, 60, 150, 36, 46
    x0, x1 = _nice_range(xs)
    y0, y1 = _nice_range([y for ys in series.values() for y in ys])

    def px(x):
        return left + (x - x0) / (x1 - x0) * (w - left - right)

    def py(y):
        return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom)

    body = [f'<line x1="{left}" y1="{h - bottom}" x2="{w - right}" y2="{h - bottom}" stroke="black"/>',
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{h - bottom}" stroke="black"/>']
    for x in xs:
        body.append(f'<text x="{px(x):.1f}" y="{h - bottom + 14}" font-size="10" '
                    f'text-anchor="middle">{x:g}</text>')
    for k in range(5):
        y = y0 + (y1 - y0) * k / 4
        body.append(f'<text x="{left - 4}" y="{py(y) + 3:.1f}" font-size="10" '
                    f'text-anchor="end">{y:.1f}</text>')
    for i, (z, ys) in enumerate(series.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
        body.append(f'<polyline class="zone" data-zone="{escape(z)}" points="{pts}" '
                    f'fill="none" stroke="{colour}" stroke-width="2"/>')
        body.append(f'<text x="{w - right + 8}" y="{top + 14 * (i + 1)}" font-size="11" '
                    f'fill="{colour}">{escape(z)}</text>')
    label = "night" if metric == "night" else "day"
    return _svg_frame(w, h, f"{group}: {label} resultant temperature", "\n".join(body) + "\n",
                      group, f"T_res {label} (C)")


def discomfort_chart(summary: ComfortSummary, title: str = "discomfort hours") -> str:
    """Stacked bar chart of day and night discomfort hours per zone."""
    w, h, left, bottom, top = 640, 400, 60, 60, 36
    zones = summary.zones
    peak = max([z.discomfort_hours for z in zones] + [1])
    slot = (w - left - 20) / max(len(zones), 1)

    def height(v):
        return v / peak * (h - top - bottom)

    body = [f'<line x1="{left}" y1="{h - bottom}" x2="{w - 20}" y2="{h - bottom}" stroke="black"/>']
    for i, z in enumerate(zones):
        x = left + i * slot + slot * 0.15
        bw = slot * 0.7
        hn, hd = height(z.discomfort_hours_night), height(z.discomfort_hours_day)
        base = h - bottom
        body.append(f'<rect class="night" x="{x:.1f}" y="{base - hn:.1f}" width="{bw:.1f}" '
                    f'height="{hn:.1f}" fill="#1f3b73"/>')
        body.append(f'<rect class="day" x="{x:.1f}" y="{base - hn - hd:.1f}" width="{bw:.1f}" '
                    f'height="{hd:.1f}" fill="#f0b429"/>')
        body.append(f'<text x="{x + bw / 2:.1f}" y="{base + 14}" font-size="10" '
                    f'text-anchor="middle">{escape(z.zone)}</text>')
        body.append(f'<text x="{x + bw / 2:.1f}" y="{base - hn - hd - 4:.1f}" font-size="10" '
                    f'text-anchor="middle">{z.discomfort_hours}</text>')
    return _svg_frame(w, h, title, "\n".join(body) + "\n", "zone", "hours")


def emit_report(report: StudyReport, fmt: str, destination: Union[str, os.PathLike]) -> list:
    """Write the report and return the written paths.

    ``fmt`` is ``"csv"`` (``destination`` is a file, or a directory that
    receives ``report.csv``) or ``"svg"`` (``destination`` is a directory).
    """
    dest = Path(destination)
    try:
        if fmt == "csv":
            path = dest / "report.csv" if dest.is_dir() else dest
            path.write_text(report.to_csv())
            return [path]
        if fmt != "svg":
            raise InputError(f"unknown report format {fmt!r}")
        dest.mkdir(parents=True, exist_ok=True)
        written = []
        groups = []
        for r in report.results:
            g = r.scenario.group
            if g is not None and g not in groups:
                groups.append(g)
        for g in groups:
            for metric in ("night", "day"):
                svg = sweep_chart(report, g, metric)
                if svg is not None:
                    path = dest / f"sweep_{g}_{metric}.svg"
                    path.write_text(svg)
                    written.append(path)
        path = dest / "discomfort_baseline.svg"
        path.write_text(discomfort_chart(report.baseline, "baseline discomfort hours"))
        written.append(path)
        return written
    except OSError as exc:
        raise InputError(f"cannot write report to {dest}: {exc}") from None
