"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 runtime or
convergence failure (including studies with failed scenarios).
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import building
from .comfort import ComfortThresholds, discomfort_hours
from .errors import InputError, SimulationError
from .solver import SimConfig, simulate
from .study import emit_report, run_study, scenarios_from_json, builtin_scenarios
from .weather import (SiteInfo, emit_weather_csv, parse_weather_csv, select_cold_sequence,
                      sunshine_hours, synth_weather)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3

TYPICAL = "typical"  # --building shorthand for the builtin typical house


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path: Path, text: str):
    try:
        path.write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def load_building(path: str) -> building.BuildingModel:
    if path == TYPICAL:
        return building.typical_house()
    return building.loads(_read(path))


def load_config(path: Optional[str], dt: Optional[float] = None):
    """Simulation config and comfort thresholds.

    The JSON file holds SimConfig fields either at the top level or under
    ``"simulation"``, and optionally ``"comfort"`` thresholds. File values
    take precedence over command-line flags.
    """
    sim = {} if dt is None else {"dt": dt}
    comfort = {}
    if path is not None:
        try:
            data = json.loads(_read(path))
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid config JSON in {path}: {exc}") from None
        if not isinstance(data, dict):
            raise InputError("config JSON must be an object")
        if "simulation" in data or "comfort" in data:
            extra = set(data) - {"simulation", "comfort"}
            if extra:
                raise InputError(f"unknown config sections: {', '.join(sorted(extra))}")
            sim.update(data.get("simulation", {}))
            comfort = data.get("comfort", {})
        else:
            sim.update(data)
    try:
        thresholds = ComfortThresholds(**comfort)
    except TypeError as exc:
        raise InputError(f"bad comfort config: {exc}") from None
    return SimConfig.from_dict(sim), thresholds


def load_weather(path: str):
    return parse_weather_csv(_read(path))


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _fmt(v):
    return "n/a" if v is None else f"{v:.2f}"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    model = load_building(args.building)
    problems = building.validate(model)
    for p in problems:
        print(p)
    if problems:
        return EXIT_INPUT
    print(f"ok: {len(model.zones)} zones, {sum(1 for _ in model.openings())} openings")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = load_building(args.building)
    weather = load_weather(args.weather)
    config, thresholds = load_config(args.config, args.dt)
    result = simulate(model, weather, config)
    summary = discomfort_hours(result, thresholds)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {out}: {exc.strerror or exc}") from None
    _write(out / "results.csv", result.to_csv())
    _write(out / "comfort.csv", summary.to_csv())
    print(f"{'zone':<14}{'Tres day':>10}{'Tres night':>12}{'disc. h':>9}")
    for z in summary.zones:
        print(f"{z.zone:<14}{_fmt(z.t_res_day):>10}{_fmt(z.t_res_night):>12}"
              f"{z.discomfort_hours:>9}")
    print(f"warm-up days: {result.warmup_days}")
    return EXIT_OK


def cmd_study(args) -> int:
    model = load_building(args.building)
    weather = load_weather(args.weather)
    config, thresholds = load_config(args.config, args.dt)
    if args.matrix == "builtin":
        scenarios = builtin_scenarios()
    else:
        scenarios = scenarios_from_json(_read(args.matrix))
    report = run_study(model, scenarios, weather, config, thresholds, threads=args.threads)
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {out}: {exc.strerror or exc}") from None
    emit_report(report, "csv", out / "report.csv")
    charts = emit_report(report, "svg", out)
    print(f"{len(report.results)} scenarios, report in {out / 'report.csv'}, "
          f"{len(charts)} charts")
    for r in report.failures:
        print(f"FAILED {r.scenario.name}: {r.error}", file=sys.stderr)
    return EXIT_RUNTIME if report.failures else EXIT_OK


def cmd_weather_inspect(args) -> int:
    series = load_weather(args.file)
    t = series.dry_bulb
    print(f"records: {len(series)} ({series.timestamps[0]:%Y-%m-%dT%H:00} .. "
          f"{series.timestamps[-1]:%Y-%m-%dT%H:00})")
    print(f"dry bulb: min {t.min():.2f} mean {t.mean():.2f} max {t.max():.2f} C")
    print(f"sunshine hours (GHI > 120 W/m2): {sunshine_hours(series)}")
    days = min(args.window_days, len(series) // 24)
    if days >= 1:
        seq = select_cold_sequence(series, days)
        first = seq.records[0].timestamp
        last = seq.records[-1].timestamp
        print(f"coldest {days}-day window: {first:%Y-%m-%dT%H:00} .. {last:%Y-%m-%dT%H:00} "
              f"(mean {seq.score:.2f} C)")
    else:
        print("coldest window: series shorter than one day")
    return EXIT_OK


def cmd_weather_synth(args) -> int:
    if args.t_min > args.t_max:
        raise UsageError("--t-min must not exceed --t-max")
    if not 0 <= args.clearness <= 1:
        raise UsageError("--clearness must lie in [0, 1]")
    if not 0 <= args.rh <= 100 or args.wind < 0:
        raise UsageError("--rh must lie in [0, 100] and --wind must be >= 0")
    try:
        site = SiteInfo(args.latitude, args.longitude, args.utc_offset, args.albedo)
        start = date.fromisoformat(args.start)
    except (InputError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    series = synth_weather(site, args.days, args.t_min, args.t_max, args.clearness,
                           args.rh, args.wind, start=start)
    _write(Path(args.out), emit_weather_csv(series))
    print(f"wrote {len(series)} records to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="passivesim", description="Passive winter-comfort building simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a building file")
    v.add_argument("building", help=f"building JSON file, or '{TYPICAL}'")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("simulate", help="simulate one building")
    s.add_argument("--building", required=True, help=f"building JSON file, or '{TYPICAL}'")
    s.add_argument("--weather", required=True, help="hourly weather CSV")
    s.add_argument("--config", help="JSON simulation/comfort settings")
    s.add_argument("--dt", type=float, help="time step in seconds (divides 3600)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_simulate)

    st = sub.add_parser("study", help="run a scenario study")
    st.add_argument("--building", required=True, help=f"building JSON file, or '{TYPICAL}'")
    st.add_argument("--weather", required=True, help="hourly weather CSV")
    st.add_argument("--matrix", default="builtin", help="'builtin' or a study matrix JSON file")
    st.add_argument("--out-dir", required=True)
    st.add_argument("--threads", type=_positive_int, default=1)
    st.add_argument("--config", help="JSON simulation/comfort settings")
    st.add_argument("--dt", type=float, help="time step in seconds (divides 3600)")
    st.set_defaults(func=cmd_study)

    w = sub.add_parser("weather", help="weather file utilities")
    wsub = w.add_subparsers(dest="weather_command", required=True, parser_class=_Parser)
    wi = wsub.add_parser("inspect", help="summary statistics of a weather CSV")
    wi.add_argument("file")
    wi.add_argument("--window-days", type=_positive_int, default=7)
    wi.set_defaults(func=cmd_weather_inspect)
    ws = wsub.add_parser("synth", help="write a synthetic design-week CSV")
    ws.add_argument("--out", required=True)
    ws.add_argument("--days", type=_positive_int, default=7)
    ws.add_argument("--t-min", type=float, default=5.6)
    ws.add_argument("--t-max", type=float, default=20.6)
    ws.add_argument("--clearness", type=float, default=0.7)
    ws.add_argument("--rh", type=float, default=80.0)
    ws.add_argument("--wind", type=float, default=2.0)
    ws.add_argument("--latitude", type=float, default=SiteInfo.latitude)
    ws.add_argument("--longitude", type=float, default=SiteInfo.longitude)
    ws.add_argument("--utc-offset", type=float, default=SiteInfo.utc_offset)
    ws.add_argument("--albedo", type=float, default=SiteInfo.ground_albedo)
    ws.add_argument("--start", default="2023-06-18", help="first day, YYYY-MM-DD")
    ws.set_defaults(func=cmd_weather_synth)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        residuals = getattr(exc, "residuals", None)
        if residuals is not None:
            print(f"zone mass residuals (kg/s): {list(map(float, residuals))}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
