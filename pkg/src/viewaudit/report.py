"""Report tables and plot-data files derived from scenario logs.

Every scenario yields one primary table; the figure-shaped scenarios also
yield x/y plot-data series. Rendering is left to external tools; these files
are plain CSV/TSV with labeled columns.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .engine import ScenarioRun, evaluate_metric
from .metrics import MetricError, daily_median_rfn, fit_exponential_decay


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        for row in self.rows:
            lines.append("\t".join(_cell(v) for v in row))
        return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _first(runs: dict[int, ScenarioRun]):
    return runs[sorted(runs)[0]]


def _medians_by_label(runs, binding: str) -> dict[str, tuple[float, float, float]]:
    """label -> (avg, min, max) of medians across seeds."""
    labels = _first(runs).bindings[binding].labels()
    out = {}
    for label in labels:
        values = []
        for run in runs.values():
            try:
                values.append(daily_median_rfn(run.bindings[binding].rfn_series(label)))
            except MetricError:
                pass
        if values:
            out[label] = (sum(values) / len(values), min(values), max(values))
    return out


def build_tables(name: str, runs: dict[int, ScenarioRun]) -> list[Table]:
    builder = _BUILDERS.get(name, _generic_table)
    return builder(name, runs)


def _generic_table(name: str, runs) -> list[Table]:
    rows = []
    for binding in sorted(_first(runs).bindings):
        for label, (avg, lo, hi) in sorted(_medians_by_label(runs, binding).items()):
            rows.append([binding, label, avg, lo, hi])
    return [Table(name, ["policy", "label", "median_rfn", "min", "max"], rows)]


def _portals_table(name: str, runs) -> list[Table]:
    per_binding = {b: _medians_by_label(runs, b) for b in _first(runs).bindings}
    rates = sorted(
        {int(l[2:]) for m in per_binding.values() for l in m}, key=int
    )
    columns = ["views_per_day"] + sorted(per_binding)
    rows = [
        [rate] + [per_binding[b].get(f"W={rate}", (float("nan"),) * 3)[0] for b in sorted(per_binding)]
        for rate in rates
    ]
    return [Table(name, columns, rows)]


def _behaviors_table(name: str, runs) -> list[Table]:
    rows = [
        [label, avg, lo, hi]
        for label, (avg, lo, hi) in sorted(_medians_by_label(runs, "main").items())
    ]
    return [Table(name, ["behavior", "avg_rfn", "min_rfn", "max_rfn"], rows)]


def _decay_table(name: str, runs) -> list[Table]:
    medians = _medians_by_label(runs, "main")
    points = sorted((int(l[2:]), avg) for l, (avg, _, _) in medians.items())
    fitted_rows = []
    try:
        fit = fit_exponential_decay([(float(w), r) for w, r in points])
        import math

        for w, measured in points:
            model = 1.0 if w <= fit.threshold_est else math.exp(
                -fit.rate_est * (w - fit.threshold_est)
            )
            fitted_rows.append([w, measured, model])
        table = Table(name, ["views_per_day", "median_rfn", "fitted"], fitted_rows)
    except Exception:
        table = Table(name, ["views_per_day", "median_rfn"], [[w, r] for w, r in points])
    return [table]


def _multi_video_table(name: str, runs) -> list[Table]:
    rows = []
    for label, (avg, _, _) in sorted(_medians_by_label(runs, "main").items()):
        w, d = label.replace("W=", "").split(",D=")
        rows.append([int(w), int(d), avg])
    rows.sort()
    return [Table(name, ["views_per_day", "videos_per_day", "median_rfn"], rows)]


def _blacklisting_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings["main"]
    s1 = result.rfn_series("conservative-1")
    s2 = result.rfn_series("conservative-2")
    rows = [
        [day, c1, c2]
        for day, c1, c2 in zip(s1.days, s1.counted, s2.counted)
    ]
    return [Table(name, ["day", "ip1_counted", "ip2_counted"], rows)]


def _nat_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings["main"]
    rows = []
    for label in ("loc1", "loc2", "loc3", "long"):
        series = result.rfn_series(label)
        for day, g, c in zip(series.days, series.generated, series.counted):
            if g == 0:
                continue
            day_type = "workday" if day % 7 < 5 else "dayoff"
            rows.append([label, day, day_type, c / g])
    return [Table(name, ["location", "day", "day_type", "daily_rfn"], rows)]


def _monetized_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings.get("main") or _first(runs).bindings["yt"]
    binding = "main" if "main" in _first(runs).bindings else "yt"
    rows = []
    for label in result.labels():
        rate = int(label[2:]) if label.startswith("W=") else 20
        pub = evaluate_metric(f"median:{binding}/{label}", runs)
        mon = evaluate_metric(f"monmedian:{binding}/{label}", runs)
        rows.append([rate, pub, mon])
    rows.sort()
    return [Table(name, ["views_per_day", "public_rfn", "monetized_rfn"], rows)]


def _advertiser_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings["main"]
    rows = []
    for video in sorted({v for v in result.video_label}):
        label = result.video_label[video]
        delivered = evaluate_metric(f"delivered:main/{video}:2-6", runs)
        public = evaluate_metric(f"pubwindow:main/{video}:2-6", runs)
        uploader = f"up-{label}"
        delay = evaluate_metric(f"suspenddelay:main/{uploader}", runs)
        rows.append([video, int(delivered), int(public), int(delay)])
    return [Table(name, ["video", "monetized_delivered", "public_counted", "suspension_delay_days"], rows)]


def _false_positive_table(name: str, runs) -> list[Table]:
    rows = []
    for binding in sorted(_first(runs).bindings):
        for label in ("social", "crowd"):
            result = _first(runs).bindings[binding]
            series = result.rfp_series(label)
            performed = sum(series.generated)
            counted = sum(series.counted)
            rfp = evaluate_metric(f"rfp:{binding}/{label}", runs)
            rows.append([binding, label, performed, counted, rfp])
    return [Table(name, ["policy", "mix", "performed_real_views", "counted_views", "rfp"], rows)]


def _multi_ip_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings["main"]
    rows = []
    for label in result.labels():
        series = result.rfn_series(label)
        cumulative = 0
        for day, c in zip(series.days, series.counted):
            cumulative += c
            rows.append([label, day, c, cumulative])
    return [Table(name, ["group", "day", "counted", "cumulative_counted"], rows)]


def _detection_table(name: str, runs) -> list[Table]:
    result = _first(runs).bindings["main"]
    rows = []
    for label in result.labels():
        history, rate = label.rsplit("-W=", 1)
        first = evaluate_metric(f"firstpunish:main/{label}", runs)
        rows.append([history, int(rate), int(first)])
    rows.sort()
    return [Table(name, ["ip_history", "views_per_day", "first_punished_day"], rows)]


def _prefix_table(name: str, runs) -> list[Table]:
    rows = []
    for x in range(24, 31):
        ok = evaluate_metric(f"allcounted:main/A-{x}", runs)
        rows.append([x, int(ok)])
    return [Table(name, ["prefix_bits", "neighbor_unaffected"], rows)]


_BUILDERS = {
    "portals-public": _portals_table,
    "behaviors": _behaviors_table,
    "decay-curve": _decay_table,
    "multi-video": _multi_video_table,
    "ip-blacklisting": _blacklisting_table,
    "nat": _nat_table,
    "monetized-baseline": _monetized_table,
    "monetized-aggressive": _monetized_table,
    "advertiser": _advertiser_table,
    "false-positives": _false_positive_table,
    "multi-ip": _multi_ip_table,
    "detection-time": _detection_table,
    "prefix": _prefix_table,
}


def write_metrics_csv(runs: dict[int, ScenarioRun], path: str) -> str:
    """Per-day metric rows for every (binding, label, seed), plus medians."""
    from .metrics import METRICS_CSV_HEADER, series_to_csv_rows

    lines = [METRICS_CSV_HEADER]
    for seed in sorted(runs):
        run = runs[seed]
        for binding_label in sorted(run.bindings):
            result = run.bindings[binding_label]
            for label in result.labels():
                series = result.rfn_series(label)
                lines.extend(
                    series_to_csv_rows(run.scenario, binding_label, seed, series)
                )
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    return path


def write_tables(
    tables: list[Table], directory: str, fmt: str = "csv"
) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for table in tables:
        if fmt == "csv":
            path = os.path.join(directory, f"{table.name}.csv")
            payload = table.to_csv()
        elif fmt == "plotdata":
            path = os.path.join(directory, f"{table.name}.plot.tsv")
            payload = table.to_tsv()
        else:
            raise ValueError(f"unknown format {fmt!r}")
        with open(path, "w") as handle:
            handle.write(payload)
        written.append(path)
    return written


__all__ = ["Table", "build_tables", "write_tables", "write_metrics_csv"]
