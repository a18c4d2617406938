"""Command-line front end: run scenarios, fit the decay model, emit reports.

The CLI is a thin shell over the library; every effect here is reproducible
by calling the engine, metrics and report modules directly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .catalog import catalog
from .engine import (
    Expectation,
    Scenario,
    load_scenario_runs,
    run_scenario_all_seeds,
    verify_expectations,
)
from .metrics import FitError, MetricError, daily_median_rfn, fit_exponential_decay
from .report import build_tables, write_metrics_csv, write_tables

DEFAULT_OUT_ENV = "VIEWAUDIT_OUT"


def _default_out() -> str:
    return os.environ.get(DEFAULT_OUT_ENV, "out")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as handle:
        return json.load(handle)


def _apply_config(scenario: Scenario, config: dict, seed: int | None, repeats: int | None) -> Scenario:
    overrides = config.get(scenario.name, {})
    if "repeats" in overrides:
        scenario.repeats = int(overrides["repeats"])
        scenario.seeds = None
        scenario.__post_init__()
    if "seeds" in overrides:
        scenario.seeds = [int(s) for s in overrides["seeds"]]
        scenario.repeats = len(scenario.seeds)
    if "expected" in overrides:
        scenario.expected = [
            Expectation(str(m), str(op), float(v), float(t))
            for m, op, v, t in overrides["expected"]
        ]
    if repeats is not None:
        base = scenario.seeds[0] if scenario.seeds else 0
        scenario.repeats = repeats
        scenario.seeds = [base + i for i in range(repeats)]
    if seed is not None:
        scenario.repeats = 1
        scenario.seeds = [seed]
    return scenario


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    by_name = {s.name: s for s in catalog()}
    if not args.scenario or "all" in args.scenario:
        names = list(by_name)
    else:
        unknown = [n for n in args.scenario if n not in by_name]
        if unknown:
            print(f"error: unknown scenario(s) {unknown}; known: {sorted(by_name)}",
                  file=sys.stderr)
            return 2
        names = args.scenario
    out_dir = args.out
    failures = 0
    summary_rows = []
    for name in names:
        scenario = _apply_config(by_name[name], config, args.seed, args.repeats)
        runs = run_scenario_all_seeds(scenario, out_dir=out_dir, resume=args.resume)
        report = verify_expectations(scenario, runs)
        tables = build_tables(name, runs)
        report_dir = os.path.join(out_dir, name, "report")
        written = write_tables(tables, report_dir, args.format)
        write_metrics_csv(runs, os.path.join(report_dir, "metrics.csv"))
        status = "ok" if report.passed else "FAILED"
        print(f"[{status}] {name}: {len(report.rows)} expectation(s), "
              f"{len(written)} table(s)")
        for row in report.rows:
            mark = "pass" if row.passed else "FAIL"
            measured = "n/a" if row.measured is None else f"{row.measured:.4f}"
            print(f"    {mark}  {row.metric} {row.op} {row.expected}"
                  f"{f'±{row.tol}' if row.tol else ''} -> {measured} {row.note}")
        if name == "decay-curve":
            _print_fit(runs)
        if not report.passed:
            failures += 1
        summary_rows.append((name, status))
    print("\nverification summary:")
    for name, status in summary_rows:
        print(f"  {name}: {status}")
    return 1 if failures else 0


def _print_fit(runs) -> None:
    points = []
    result = runs[sorted(runs)[0]].bindings["main"]
    for label in result.labels():
        if label.startswith("W="):
            points.append(
                (float(label[2:]), daily_median_rfn(result.rfn_series(label)))
            )
    try:
        fit = fit_exponential_decay(points)
        r2 = "n/a" if fit.r_squared is None else f"{fit.r_squared:.4f}"
        print(f"    fitted: threshold={fit.threshold_est:.0f} "
              f"rate={fit.rate_est:.4f} r_squared={r2}")
    except (FitError, MetricError) as exc:
        print(f"    fit unavailable: {exc}")


def cmd_fit(args: argparse.Namespace) -> int:
    scenario_dir = args.log.rstrip("/")
    out_root, name = os.path.split(scenario_dir)
    try:
        runs = load_scenario_runs(out_root or ".", name)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    points: dict[float, list[float]] = {}
    for run in runs.values():
        binding = run.bindings.get(args.binding)
        if binding is None:
            print(f"error: no binding {args.binding!r} in logs", file=sys.stderr)
            return 2
        for label in binding.labels():
            if label.startswith("W=") and "," not in label:
                try:
                    median = daily_median_rfn(binding.rfn_series(label))
                except MetricError:
                    continue
                points.setdefault(float(label[2:]), []).append(median)
    merged = [(w, sum(v) / len(v)) for w, v in sorted(points.items())]
    try:
        fit = fit_exponential_decay(merged)
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 1
    r2 = "" if fit.r_squared is None else f"{fit.r_squared:.6f}"
    print(f"threshold_est={fit.threshold_est:.0f}")
    print(f"rate_est={fit.rate_est:.6f}")
    print(f"r_squared={r2 or 'n/a'}")
    csv_path = os.path.join(scenario_dir, "fit.csv")
    with open(csv_path, "w") as handle:
        handle.write("threshold_est,rate_est,r_squared\n")
        handle.write(f"{fit.threshold_est:.0f},{fit.rate_est:.6f},{r2}\n")
    print(f"wrote {csv_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    out_root = args.log.rstrip("/")
    if not os.path.isdir(out_root):
        print(f"error: no log directory {out_root!r}", file=sys.stderr)
        return 2
    names = args.scenario or [
        d for d in sorted(os.listdir(out_root))
        if os.path.isdir(os.path.join(out_root, d))
    ]
    wrote_any = False
    for name in names:
        try:
            runs = load_scenario_runs(out_root, name)
        except FileNotFoundError:
            continue
        missing = _missing_days(runs)
        if missing:
            print(f"error: {name}: incomplete logs, missing days {missing}",
                  file=sys.stderr)
            return 1
        tables = build_tables(name, runs)
        written = write_tables(
            tables, os.path.join(out_root, name, "report"), args.format
        )
        wrote_any = True
        for path in written:
            print(f"wrote {path}")
    if not wrote_any:
        print(f"error: no scenario logs found under {out_root!r}", file=sys.stderr)
        return 2
    return 0


def _missing_days(runs) -> list[int]:
    missing = []
    for run in runs.values():
        for binding in run.bindings.values():
            days_present = {day for (_, day) in binding.counters}
            for day in range(binding.total_days):
                if day not in days_present:
                    missing.append(day)
    return sorted(set(missing))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewaudit",
        description="Simulate view traffic through portal audit policies and "
                    "reproduce the detection-rate experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenarios and verify expectations")
    run.add_argument("scenario", nargs="*", help="scenario names, or 'all'")
    run.add_argument("--scenario", dest="scenario_flag", action="append", default=[],
                     help="scenario name (repeatable); alternative to positionals")
    run.add_argument("--seed", type=int, default=None, help="override the seed (single repeat)")
    run.add_argument("--repeats", type=int, default=None, help="override the repeat count")
    run.add_argument("--out", default=_default_out(),
                     help=f"output directory (default $%s or ./out)" % DEFAULT_OUT_ENV)
    run.add_argument("--config", default=None, help="JSON file overriding catalog defaults")
    run.add_argument("--format", choices=("csv", "plotdata"), default="csv")
    run.add_argument("--resume", action="store_true",
                     help="resume interrupted runs from their last completed day")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit", help="fit the decay model to a logged rate sweep")
    fit.add_argument("--log", required=True, help="scenario log directory (e.g. out/decay-curve)")
    fit.add_argument("--binding", default="main")
    fit.set_defaults(func=cmd_fit)

    report = sub.add_parser("report", help="emit report tables from logs")
    report.add_argument("--log", required=True, help="output directory holding scenario logs")
    report.add_argument("--scenario", action="append", default=None)
    report.add_argument("--format", choices=("csv", "plotdata"), default="csv")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "scenario_flag", None):
        args.scenario = list(args.scenario) + list(args.scenario_flag)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
