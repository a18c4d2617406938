"""Scenario runner: binds traffic to audit policies on the simulated clock,
persists event/verdict logs incrementally per day, and verifies each
scenario's expected metrics.

A scenario holds one or more policy bindings; each binding runs the merged
traffic through its own isolated policy instance, one day at a time, calling
end_of_day at every boundary. Runs are deterministic per (scenario, seed):
replaying one yields byte-identical logs. Per-day checkpoints make long runs
resumable from the last completed day.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .audit import Adjustment, Verdict, make_policy
from .metrics import (
    FitError,
    MetricError,
    MetricSeries,
    daily_median_rfn,
    fit_exponential_decay,
)
from .model import IpHistory, IpIdentity, ValidationError, ViewEvent
from .traffic import (
    RealTrafficSpec,
    TrafficSpec,
    apply_nat,
    gen_real_user_views,
    merge_streams,
    real_user_ip_pool,
    schedule_views,
)

FORMAT_VERSION = 1
EVENTS_HEADER = "#viewaudit events v1"
VERDICTS_HEADER = "#viewaudit verdicts v1"
SNAPSHOTS_HEADER = "#viewaudit snapshots v1"
ADJUSTMENTS_HEADER = "#viewaudit adjustments v1"
SNAPSHOT_COLUMNS = (
    "video,day,public_counted,monetized_counted,"
    "generated_fake,generated_real,generated_ads"
)


@dataclass
class VideoInfo:
    uploader: str
    campaign_targeted: bool = False


@dataclass
class PolicyBinding:
    """One (policy, traffic) pairing inside a scenario."""

    label: str
    portal: str
    traffic: list
    overrides: dict = field(default_factory=dict)
    videos: dict[str, VideoInfo] = field(default_factory=dict)


@dataclass
class Expectation:
    metric: str
    op: str  # approx | le | ge | eq
    value: float
    tol: float = 0.0


@dataclass
class Scenario:
    name: str
    description: str
    bindings: list[PolicyBinding]
    repeats: int = 1
    seeds: Optional[list[int]] = None
    expected: list[Expectation] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.seeds is None:
            base = int.from_bytes(hashlib.sha256(self.name.encode()).digest()[:4], "big")
            self.seeds = [base + i for i in range(self.repeats)]
        if len(self.seeds) != self.repeats:
            raise ValidationError(f"{self.name}: |seeds| must equal repeats")
        labels = [b.label for b in self.bindings]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"{self.name}: binding labels must be unique")


@dataclass
class DayCounters:
    generated_fake: int = 0
    generated_real: int = 0
    generated_ads: int = 0
    pub_ingest: int = 0
    mon_ingest: int = 0
    pub_adjust: int = 0
    mon_adjust: int = 0

    @property
    def public_final(self) -> int:
        return self.pub_ingest - self.pub_adjust

    @property
    def monetized_final(self) -> int:
        return self.mon_ingest - self.mon_adjust


@dataclass
class BindingResult:
    """Complete in-memory log of one binding's run."""

    scenario: str
    seed: int
    label: str
    portal: str
    total_days: int
    events: list[ViewEvent]
    verdicts: list[Verdict]
    adjustments: list[Adjustment]
    counters: dict[tuple[str, int], DayCounters]
    video_label: dict[str, str]
    policy_state: dict

    def _label_days(self, label: str, generated_attr: str, counted_attr: str) -> MetricSeries:
        videos = {v for v, lab in self.video_label.items() if lab == label}
        if not videos:
            raise MetricError(f"no videos for label {label!r}")
        days = list(range(self.total_days))
        generated, counted = [], []
        for day in days:
            g = c = 0
            for video in videos:
                dc = self.counters.get((video, day))
                if dc is None:
                    continue
                g += getattr(dc, generated_attr)
                c += getattr(dc, counted_attr)
            generated.append(g)
            counted.append(c)
        return MetricSeries(label, tuple(days), tuple(generated), tuple(counted))

    def snapshots(self) -> list:
        from .model import CounterSnapshot

        return [
            CounterSnapshot(
                video=video, day=day,
                public_counted=dc.public_final,
                monetized_counted=dc.monetized_final,
                generated_fake=dc.generated_fake,
                generated_real=dc.generated_real,
                generated_ads=dc.generated_ads,
            )
            for (video, day), dc in sorted(self.counters.items())
        ]

    def rfn_series(self, label: str) -> MetricSeries:
        return self._label_days(label, "generated_fake", "public_final")

    def rfp_series(self, label: str) -> MetricSeries:
        return self._label_days(label, "generated_real", "public_final")

    def mon_series(self, label: str) -> MetricSeries:
        return self._label_days(label, "generated_ads", "monetized_final")

    def labels(self) -> list[str]:
        return sorted(set(self.video_label.values()))


@dataclass
class ScenarioRun:
    scenario: str
    seed: int
    bindings: dict[str, BindingResult]


# ---------------------------------------------------------------------------
# Traffic realization
# ---------------------------------------------------------------------------


def _spec_seed(run_seed: int, spec_label: str, index: int) -> int:
    digest = hashlib.sha256(f"{run_seed}:{spec_label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def realize_traffic(
    binding: PolicyBinding, run_seed: int
) -> tuple[list[ViewEvent], dict[str, str], list[IpIdentity], int]:
    """Generate and merge the binding's streams.

    Returns (events, video -> label map, IP identities to register, total days).
    The per-spec seed never includes the binding label, so sibling bindings
    fed identical specs see byte-identical traffic.
    """
    streams: list[list[ViewEvent]] = []
    video_label: dict[str, str] = {}
    identities: list[IpIdentity] = []
    total_days = 0
    for index, spec in enumerate(binding.traffic):
        seed = _spec_seed(run_seed, spec.label, index)
        if isinstance(spec, RealTrafficSpec):
            events = gen_real_user_views(spec.count, spec.portal_mix, seed, spec.days)
            identities.extend(real_user_ip_pool(spec.portal_mix))
            total_days = max(total_days, spec.days)
            for event in events:
                video_label.setdefault(event.video, spec.label)
        elif isinstance(spec, TrafficSpec):
            resolved = replace(spec, seed=seed)
            events = schedule_views(resolved)
            if spec.nat is not None:
                events = apply_nat(events, spec.nat, seed)
                identities.append(
                    IpIdentity(spec.nat.public_ip, IpHistory.SEEN_CLEAN)
                )
                for event in events:
                    if event.is_real_user:
                        video_label.setdefault(event.video, f"{spec.label}:bg")
            else:
                identities.extend(spec.ip_pool)
            for video in spec.target_videos:
                video_label.setdefault(video, spec.label)
            total_days = max(total_days, spec.start_day + spec.days)
        else:
            raise ValidationError(f"unsupported traffic spec {type(spec)!r}")
        streams.append(events)
    return merge_streams(streams), video_label, identities, total_days


# ---------------------------------------------------------------------------
# Binding runner with incremental persistence
# ---------------------------------------------------------------------------


class _BindingWriter:
    """Incremental per-day persistence of one binding run."""

    def __init__(self, directory: Optional[str], fresh: bool):
        self.dir = directory
        if directory is None:
            return
        os.makedirs(directory, exist_ok=True)
        mode = "w" if fresh else "a"
        self._events = open(os.path.join(directory, "events.log"), mode)
        self._verdicts = open(os.path.join(directory, "verdicts.log"), mode)
        self._adjust = open(os.path.join(directory, "adjustments.log"), mode)
        if fresh:
            self._events.write(EVENTS_HEADER + "\n")
            self._verdicts.write(VERDICTS_HEADER + "\n")
            self._adjust.write(ADJUSTMENTS_HEADER + "\n")

    def day(self, events, verdicts, adjustments) -> None:
        if self.dir is None:
            return
        for event, verdict in zip(events, verdicts):
            self._events.write(event.to_line() + "\n")
            self._verdicts.write(
                f"{event.time.day}\t{event.time.sec}\t{event.source_ip}\t"
                f"{event.video}\t{int(verdict.count_public)}\t"
                f"{int(verdict.count_monetized)}\t{verdict.reason.value}\n"
            )
        for adj in adjustments:
            self._adjust.write(adj.to_line() + "\n")
        for handle in (self._events, self._verdicts, self._adjust):
            handle.flush()

    def checkpoint(self, payload: dict) -> None:
        if self.dir is None:
            return
        path = os.path.join(self.dir, "checkpoint.json")
        with open(path + ".tmp", "w") as handle:
            json.dump(payload, handle)
        os.replace(path + ".tmp", path)

    def finish(self, result: BindingResult, meta: dict) -> None:
        if self.dir is None:
            return
        self._events.close()
        self._verdicts.close()
        self._adjust.close()
        with open(os.path.join(self.dir, "snapshots.csv"), "w") as handle:
            handle.write(SNAPSHOTS_HEADER + "\n")
            handle.write(SNAPSHOT_COLUMNS + "\n")
            for (video, day), dc in sorted(result.counters.items()):
                handle.write(
                    f"{video},{day},{dc.public_final},{dc.monetized_final},"
                    f"{dc.generated_fake},{dc.generated_real},{dc.generated_ads}\n"
                )
        with open(os.path.join(self.dir, "meta.json"), "w") as handle:
            json.dump(meta, handle, indent=2, sort_keys=True)
        checkpoint = os.path.join(self.dir, "checkpoint.json")
        if os.path.exists(checkpoint):
            os.remove(checkpoint)


def _counters_to_json(counters: dict[tuple[str, int], DayCounters]) -> list:
    return [
        [video, day, dc.generated_fake, dc.generated_real, dc.generated_ads,
         dc.pub_ingest, dc.mon_ingest, dc.pub_adjust, dc.mon_adjust]
        for (video, day), dc in sorted(counters.items())
    ]


def _counters_from_json(rows: list) -> dict[tuple[str, int], DayCounters]:
    out: dict[tuple[str, int], DayCounters] = {}
    for video, day, gf, gr, ga, pi, mi, pa, ma in rows:
        out[(video, day)] = DayCounters(gf, gr, ga, pi, mi, pa, ma)
    return out


def run_binding(
    scenario_name: str,
    binding: PolicyBinding,
    run_seed: int,
    out_dir: Optional[str] = None,
    resume: bool = False,
) -> BindingResult:
    events, video_label, identities, total_days = realize_traffic(binding, run_seed)

    policy = make_policy(binding.portal, overrides=binding.overrides)
    for identity in identities:
        policy.register_ip(identity.address, identity.history)
    for video, label in sorted(video_label.items()):
        info = binding.videos.get(video)
        if info is None:
            policy.register_video(video, f"up-{video}")
        else:
            policy.register_video(video, info.uploader, info.campaign_targeted)

    start_day = 0
    counters: dict[tuple[str, int], DayCounters] = {}
    adjustments: list[Adjustment] = []
    directory = os.path.join(out_dir, binding.label) if out_dir else None
    checkpoint_path = os.path.join(directory, "checkpoint.json") if directory else None
    if resume and checkpoint_path and os.path.exists(checkpoint_path):
        with open(checkpoint_path) as handle:
            payload = json.load(handle)
        if payload["seed"] == run_seed and payload["scenario"] == scenario_name:
            start_day = payload["next_day"]
            policy.restore(payload["policy"])
            counters = _counters_from_json(payload["counters"])
            adjustments = [Adjustment.from_line(l) for l in payload["adjustments"]]
    writer = _BindingWriter(directory, fresh=start_day == 0)

    by_day: dict[int, list[ViewEvent]] = {}
    for event in events:
        by_day.setdefault(event.time.day, []).append(event)

    verdicts: list[Verdict] = []
    kept_events: list[ViewEvent] = []
    # Replays are deterministic, so a resumed run re-derives the skipped
    # prefix's verdicts only for the in-memory result, without re-writing it.
    for day in range(total_days):
        day_events = by_day.get(day, [])
        if day < start_day:
            continue
        day_verdicts = []
        for event in day_events:
            verdict = policy.ingest(event)
            day_verdicts.append(verdict)
            key = (event.video, day)
            dc = counters.setdefault(key, DayCounters())
            if event.is_real_user:
                dc.generated_real += 1
            else:
                dc.generated_fake += 1
            if event.ad_watched_fully:
                dc.generated_ads += 1
            if verdict.count_public:
                dc.pub_ingest += 1
            if verdict.count_monetized:
                dc.mon_ingest += 1
        day_adjustments = policy.end_of_day(day)
        for adj in day_adjustments:
            dc = counters.setdefault((adj.video, adj.day), DayCounters())
            if adj.kind == "public":
                dc.pub_adjust += adj.amount
            else:
                dc.mon_adjust += adj.amount
        adjustments.extend(day_adjustments)
        kept_events.extend(day_events)
        verdicts.extend(day_verdicts)
        writer.day(day_events, day_verdicts, day_adjustments)
        writer.checkpoint(
            {
                "scenario": scenario_name,
                "seed": run_seed,
                "next_day": day + 1,
                "policy": policy.snapshot(),
                "counters": _counters_to_json(counters),
                "adjustments": [a.to_line() for a in adjustments],
            }
        )

    # Ensure snapshots cover every simulated day for every known video.
    for video in video_label:
        for day in range(total_days):
            counters.setdefault((video, day), DayCounters())

    if start_day > 0:
        # Recover the skipped prefix for the in-memory result via replay.
        fresh = run_binding(scenario_name, binding, run_seed, out_dir=None)
        kept_events = fresh.events
        verdicts = fresh.verdicts

    result = BindingResult(
        scenario=scenario_name,
        seed=run_seed,
        label=binding.label,
        portal=binding.portal,
        total_days=total_days,
        events=kept_events,
        verdicts=verdicts,
        adjustments=adjustments,
        counters=counters,
        video_label=video_label,
        policy_state=policy.snapshot(),
    )
    writer.finish(
        result,
        meta={
            "format": FORMAT_VERSION,
            "scenario": scenario_name,
            "binding": binding.label,
            "portal": binding.portal,
            "seed": run_seed,
            "days": total_days,
            "events": len(result.events),
            "video_label": video_label,
            "policy_state": result.policy_state,
        },
    )
    return result


def run_scenario(
    scenario: Scenario,
    seed: int,
    out_dir: Optional[str] = None,
    resume: bool = False,
) -> ScenarioRun:
    """Run every binding of a scenario under one seed."""
    base = os.path.join(out_dir, scenario.name, f"seed-{seed}") if out_dir else None
    bindings = {}
    for binding in scenario.bindings:
        bindings[binding.label] = run_binding(
            scenario.name, binding, seed, out_dir=base, resume=resume
        )
    return ScenarioRun(scenario.name, seed, bindings)


def run_scenario_all_seeds(
    scenario: Scenario, out_dir: Optional[str] = None, resume: bool = False,
    seed_override: Optional[int] = None,
) -> dict[int, ScenarioRun]:
    seeds = [seed_override] if seed_override is not None else list(scenario.seeds or [])
    return {
        seed: run_scenario(scenario, seed, out_dir=out_dir, resume=resume)
        for seed in seeds
    }


# ---------------------------------------------------------------------------
# Log-scan oracle
# ---------------------------------------------------------------------------


def recompute_counters_from_logs(directory: str) -> dict[tuple[str, int], tuple[int, int]]:
    """Brute-force oracle: final (public, monetized) per (video, day) from a
    raw scan of the verdict and adjustment logs."""
    pub: dict[tuple[str, int], int] = {}
    mon: dict[tuple[str, int], int] = {}
    with open(os.path.join(directory, "verdicts.log")) as handle:
        header = handle.readline().rstrip("\n")
        if header != VERDICTS_HEADER:
            raise ValidationError(f"unexpected verdicts header {header!r}")
        for line in handle:
            day_s, _sec, _ip, video, pub_s, mon_s, _reason = line.rstrip("\n").split("\t")
            key = (video, int(day_s))
            pub[key] = pub.get(key, 0) + int(pub_s)
            mon[key] = mon.get(key, 0) + int(mon_s)
    with open(os.path.join(directory, "adjustments.log")) as handle:
        header = handle.readline().rstrip("\n")
        if header != ADJUSTMENTS_HEADER:
            raise ValidationError(f"unexpected adjustments header {header!r}")
        for line in handle:
            adj = Adjustment.from_line(line)
            key = (adj.video, adj.day)
            if adj.kind == "public":
                pub[key] = pub.get(key, 0) - adj.amount
            else:
                mon[key] = mon.get(key, 0) - adj.amount
    keys = set(pub) | set(mon)
    return {k: (pub.get(k, 0), mon.get(k, 0)) for k in keys}


def read_snapshots(directory: str) -> dict[tuple[str, int], tuple[int, int]]:
    out: dict[tuple[str, int], tuple[int, int]] = {}
    with open(os.path.join(directory, "snapshots.csv")) as handle:
        header = handle.readline().rstrip("\n")
        if header != SNAPSHOTS_HEADER:
            raise ValidationError(f"unexpected snapshots header {header!r}")
        handle.readline()  # column names
        for line in handle:
            video, day, pub, mon, *_ = line.rstrip("\n").split(",")
            out[(video, int(day))] = (int(pub), int(mon))
    return out


def load_binding_result(directory: str) -> BindingResult:
    """Rebuild a binding result from persisted logs (events omitted)."""
    with open(os.path.join(directory, "meta.json")) as handle:
        meta = json.load(handle)
    counters: dict[tuple[str, int], DayCounters] = {}
    with open(os.path.join(directory, "snapshots.csv")) as handle:
        header = handle.readline().rstrip("\n")
        if header != SNAPSHOTS_HEADER:
            raise ValidationError(f"unexpected snapshots header {header!r}")
        handle.readline()
        for line in handle:
            video, day_s, pub, mon, gf, gr, ga = line.rstrip("\n").split(",")
            counters[(video, int(day_s))] = DayCounters(
                generated_fake=int(gf), generated_real=int(gr),
                generated_ads=int(ga), pub_ingest=int(pub), mon_ingest=int(mon),
            )
    adjustments: list[Adjustment] = []
    with open(os.path.join(directory, "adjustments.log")) as handle:
        header = handle.readline().rstrip("\n")
        if header != ADJUSTMENTS_HEADER:
            raise ValidationError(f"unexpected adjustments header {header!r}")
        for line in handle:
            adjustments.append(Adjustment.from_line(line))
    # Snapshots store finals; re-express them as ingest totals so the
    # DayCounters final properties remain correct with adjustments re-added.
    for adj in adjustments:
        dc = counters.setdefault((adj.video, adj.day), DayCounters())
        if adj.kind == "public":
            dc.pub_ingest += adj.amount
            dc.pub_adjust += adj.amount
        else:
            dc.mon_ingest += adj.amount
            dc.mon_adjust += adj.amount
    return BindingResult(
        scenario=meta["scenario"],
        seed=meta["seed"],
        label=meta["binding"],
        portal=meta["portal"],
        total_days=meta["days"],
        events=[],
        verdicts=[],
        adjustments=adjustments,
        counters=counters,
        video_label=dict(meta["video_label"]),
        policy_state=meta.get("policy_state", {}),
    )


def load_scenario_runs(out_dir: str, scenario_name: str) -> dict[int, ScenarioRun]:
    """Load every persisted (seed, binding) run of one scenario."""
    base = os.path.join(out_dir, scenario_name)
    if not os.path.isdir(base):
        raise FileNotFoundError(f"no logs for scenario {scenario_name!r} under {out_dir}")
    runs: dict[int, ScenarioRun] = {}
    for seed_dir in sorted(os.listdir(base)):
        if not seed_dir.startswith("seed-"):
            continue
        seed = int(seed_dir.split("-", 1)[1])
        bindings = {}
        seed_path = os.path.join(base, seed_dir)
        for label in sorted(os.listdir(seed_path)):
            binding_dir = os.path.join(seed_path, label)
            if os.path.isfile(os.path.join(binding_dir, "meta.json")):
                bindings[label] = load_binding_result(binding_dir)
        if bindings:
            runs[seed] = ScenarioRun(scenario_name, seed, bindings)
    if not runs:
        raise FileNotFoundError(f"no completed runs under {base}")
    return runs


# ---------------------------------------------------------------------------
# Expectation evaluation
# ---------------------------------------------------------------------------


@dataclass
class VerificationRow:
    metric: str
    op: str
    expected: float
    tol: float
    measured: Optional[float]
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    scenario: str
    rows: list[VerificationRow]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _subset_median(series: MetricSeries, keep: Callable[[int], bool]) -> float:
    days, gen, cnt = [], [], []
    for d, g, c in zip(series.days, series.generated, series.counted):
        if keep(d):
            days.append(d)
            gen.append(g)
            cnt.append(c)
    return daily_median_rfn(MetricSeries(series.label, tuple(days), tuple(gen), tuple(cnt)))


def _fit_points(result: BindingResult) -> list[tuple[float, float]]:
    points = []
    for label in result.labels():
        if label.startswith("W=") and "," not in label:
            points.append((float(label[2:]), daily_median_rfn(result.rfn_series(label))))
    return points


def evaluate_metric(metric: str, runs: dict[int, ScenarioRun]) -> float:
    """Compute one named metric, averaged across seeds where that is meaningful."""
    kind, _, rest = metric.partition(":")
    parts = rest.split("/", 1)
    binding_label = parts[0]
    arg = parts[1] if len(parts) > 1 else ""
    results = [run.bindings[binding_label] for run in runs.values()]

    if kind == "median":
        return _mean([daily_median_rfn(r.rfn_series(arg)) for r in results])
    if kind == "mean":
        return _mean([r.rfn_series(arg).mean() for r in results])
    if kind == "total":
        return _mean([r.rfn_series(arg).total_ratio() for r in results])
    if kind == "monmedian":
        return _mean([daily_median_rfn(r.mon_series(arg)) for r in results])
    if kind == "mondelta":
        return _mean(
            [
                daily_median_rfn(r.mon_series(arg)) - daily_median_rfn(r.rfn_series(arg))
                for r in results
            ]
        )
    if kind == "rfp":
        values = []
        for r in results:
            series = r.rfp_series(arg)
            total_real = sum(series.generated)
            if total_real == 0:
                raise MetricError(f"no real views for {arg}")
            values.append(max(0.0, 1.0 - sum(series.counted) / total_real))
        return _mean(values)
    if kind in ("fitk", "fitr2", "fitthr"):
        by_w: dict[float, list[float]] = {}
        for r in results:
            for w, median in _fit_points(r):
                by_w.setdefault(w, []).append(median)
        points = [(w, _mean(vals)) for w, vals in sorted(by_w.items())]
        fit = fit_exponential_decay(points)
        if kind == "fitk":
            return fit.rate_est
        if kind == "fitthr":
            return fit.threshold_est
        if fit.r_squared is None:
            raise MetricError("r_squared undefined (fewer than 3 fitted points)")
        return fit.r_squared
    if kind == "allcounted":
        ok = all(
            c == g
            for r in results
            for g, c in zip(r.rfn_series(arg).generated, r.rfn_series(arg).counted)
            if g > 0
        )
        return 1.0 if ok else 0.0
    if kind == "timeline":
        label, _, span = arg.partition(":")
        lo, hi = (int(x) for x in span.split("-"))
        ok = True
        for r in results:
            series = r.rfn_series(label)
            for d, g, c in zip(series.days, series.generated, series.counted):
                if g == 0:
                    continue
                if lo <= d <= hi:
                    ok = ok and c == 0
                else:
                    ok = ok and c == g
        return 1.0 if ok else 0.0
    if kind == "firstpunish":
        days = set()
        for r in results:
            series = r.rfn_series(arg)
            first = -1
            for d, g, c in zip(series.days, series.generated, series.counted):
                if g > 0 and c < g:
                    first = d
                    break
            days.add(first)
        if len(days) != 1:
            raise MetricError(f"firstpunish differs across seeds: {sorted(days)}")
        return float(days.pop())
    if kind == "linear":
        import numpy as np

        values = []
        for r in results:
            series = r.rfn_series(arg)
            cumulative = np.cumsum(series.counted).astype(float)
            xs = np.arange(len(cumulative), dtype=float)
            slope, intercept = np.polyfit(xs, cumulative, 1)
            pred = slope * xs + intercept
            ss_res = float(np.sum((cumulative - pred) ** 2))
            ss_tot = float(np.sum((cumulative - cumulative.mean()) ** 2))
            values.append(1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot)
        return _mean(values)
    if kind == "absdiff":
        label_a, label_b = arg.split("|")
        return _mean(
            [
                abs(
                    daily_median_rfn(r.rfn_series(label_a))
                    - daily_median_rfn(r.rfn_series(label_b))
                )
                for r in results
            ]
        )
    if kind == "workdaymedian":
        return _mean(
            [_subset_median(r.rfn_series(arg), lambda d: d % 7 < 5) for r in results]
        )
    if kind == "dayoffmedian":
        return _mean(
            [_subset_median(r.rfn_series(arg), lambda d: d % 7 >= 5) for r in results]
        )
    if kind == "suspenddelay":
        values = set()
        for r in results:
            state = r.policy_state
            effective = state.get("suspend_effective", {}).get(arg)
            first_ad = state.get("first_ad_day", {}).get(arg)
            suspended = arg in state.get("suspended", [])
            if effective is None or first_ad is None or not suspended:
                values.add(-1.0)
            else:
                values.add(float(effective - first_ad))
        if len(values) != 1:
            raise MetricError(f"suspenddelay differs across seeds: {sorted(values)}")
        return values.pop()
    if kind == "retro":
        ok = True
        for r in results:
            final_mon = sum(
                dc.monetized_final for (v, _), dc in r.counters.items() if v == arg
            )
            has_removal = any(
                a.kind == "monetized" and a.note == "suspension" and a.video == arg
                for a in r.adjustments
            )
            ok = ok and final_mon == 0 and has_removal
        return 1.0 if ok else 0.0
    if kind in ("mongepub", "delivered", "pubwindow"):
        video, _, span = arg.partition(":")
        lo, hi = (int(x) for x in span.split("-"))
        values = []
        for r in results:
            pub = sum(
                dc.public_final
                for (v, d), dc in r.counters.items()
                if v == video and lo <= d <= hi
            )
            quota_adj = sum(
                a.amount
                for a in r.adjustments
                if a.video == video and a.kind == "monetized" and a.note == "quota"
                and lo <= a.day <= hi
            )
            ingest = sum(
                dc.mon_ingest
                for (v, d), dc in r.counters.items()
                if v == video and lo <= d <= hi
            )
            delivered = ingest - quota_adj
            if kind == "delivered":
                values.append(float(delivered))
            elif kind == "pubwindow":
                values.append(float(pub))
            else:
                values.append(float(delivered - pub))
        return _mean(values)
    raise MetricError(f"unknown metric {metric!r}")


def verify_expectations(
    scenario: Scenario, runs: dict[int, ScenarioRun]
) -> VerificationReport:
    rows = []
    for expectation in scenario.expected:
        try:
            measured = evaluate_metric(expectation.metric, runs)
        except (MetricError, FitError, KeyError, ValidationError) as exc:
            rows.append(
                VerificationRow(
                    expectation.metric, expectation.op, expectation.value,
                    expectation.tol, None, False, f"missing: {exc}",
                )
            )
            continue
        op, value, tol = expectation.op, expectation.value, expectation.tol
        if op == "approx":
            passed = abs(measured - value) <= tol
        elif op == "le":
            passed = measured <= value + tol
        elif op == "ge":
            passed = measured >= value - tol
        elif op == "eq":
            passed = abs(measured - value) <= tol
        else:
            rows.append(
                VerificationRow(
                    expectation.metric, op, value, tol, measured, False,
                    f"unknown op {op!r}",
                )
            )
            continue
        rows.append(
            VerificationRow(expectation.metric, op, value, tol, measured, passed)
        )
    return VerificationReport(scenario.name, rows)


__all__ = [
    "VideoInfo",
    "PolicyBinding",
    "Expectation",
    "Scenario",
    "DayCounters",
    "BindingResult",
    "ScenarioRun",
    "realize_traffic",
    "run_binding",
    "run_scenario",
    "run_scenario_all_seeds",
    "recompute_counters_from_logs",
    "read_snapshots",
    "load_binding_result",
    "load_scenario_runs",
    "VerificationRow",
    "VerificationReport",
    "evaluate_metric",
    "verify_expectations",
]
