"""Acceptance suite: every criterion at its stated tolerance.

Run with `pytest tests/test_acceptance.py -s` to see one pass/fail line per
criterion. All scenarios run once (persisted) in a module fixture; the
replay-equivalence criterion performs a second persisted pass.
"""

import math
import os

import pytest

from viewaudit.catalog import catalog, scenario_by_name
from viewaudit.engine import (
    evaluate_metric,
    read_snapshots,
    recompute_counters_from_logs,
    run_scenario_all_seeds,
)
from viewaudit.metrics import daily_median_rfn, fit_exponential_decay

CRITERIA_STATUS = {}


@pytest.fixture(scope="module")
def logs_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("acceptance-logs"))


@pytest.fixture(scope="module")
def all_runs(logs_dir):
    """scenario name -> (scenario, {seed: ScenarioRun})."""
    out = {}
    for scenario in catalog():
        out[scenario.name] = (
            scenario,
            run_scenario_all_seeds(scenario, out_dir=logs_dir),
        )
    return out


def report(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {number:02d} {name}: {detail}"
    CRITERIA_STATUS[number] = line
    print(line)
    assert passed, line


def test_criterion_01_decay_knee(all_runs):
    scenario, runs = all_runs["decay-curve"]
    for rate in (1, 4, 7, 8):
        assert evaluate_metric(f"median:main/W={rate}", runs) == 1.0
    for rate in (30, 40, 50, 60):
        assert evaluate_metric(f"median:main/W={rate}", runs) <= 0.01
    k_hat = evaluate_metric("fitk:main", runs)
    r_squared = evaluate_metric("fitr2:main", runs)
    ok = abs(k_hat - 0.455) <= 0.02 and r_squared >= 0.99
    report(1, "decay knee", ok,
           f"median=1.00 for W<=8, <=0.01 for W>=30, k_hat={k_hat:.4f}, R2={r_squared:.4f}")


def test_criterion_02_behaviors(all_runs):
    scenario, runs = all_runs["behaviors"]
    complete = evaluate_metric("median:main/C", runs)
    burst = evaluate_metric("median:main/B", runs)
    deterministic = evaluate_metric("median:main/D", runs)
    short_views = evaluate_metric("median:main/SV", runs)
    ck_gap = evaluate_metric("absdiff:main/CK|D", runs)
    ok = (
        abs(complete - 0.40) <= 0.05
        and burst <= 0.04
        and abs(deterministic - 0.07) <= 0.04
        and abs(short_views - 0.06) <= 0.04
        and ck_gap <= 0.02
    )
    report(2, "behaviors", ok,
           f"C={complete:.3f} B={burst:.3f} D={deterministic:.3f} "
           f"SV={short_views:.3f} |CK-D|={ck_gap:.3f}")


def test_criterion_03_portal_comparison(all_runs):
    scenario, runs = all_runs["portals-public"]
    yt = [evaluate_metric(f"median:yt/W={r}", runs) for r in (100, 400, 500)]
    dm = [evaluate_metric(f"median:dm/W={r}", runs) for r in (100, 400, 500)]
    perm = [evaluate_metric(f"median:perm/W={r}", runs) for r in (100, 400, 500)]
    ok = (
        all(v <= 0.01 for v in yt)
        and abs(dm[0] - 1.00) <= 0.02
        and abs(dm[1] - 0.93) <= 0.02
        and abs(dm[2] - 0.85) <= 0.02
        and all(v >= 0.95 for v in perm)
    )
    report(3, "portal comparison", ok,
           f"yt={[f'{v:.3f}' for v in yt]} dm={[f'{v:.3f}' for v in dm]} "
           f"perm={[f'{v:.3f}' for v in perm]}")


def test_criterion_04_monetized_discrepancy(all_runs):
    _, base_runs = all_runs["monetized-baseline"]
    public = evaluate_metric("median:yt/main", base_runs)
    monetized = evaluate_metric("monmedian:yt/main", base_runs)
    _, agg_runs = all_runs["monetized-aggressive"]
    agg_ok = True
    deltas = []
    for rate in (40, 60, 80, 100, 150):
        mon = evaluate_metric(f"monmedian:main/W={rate}", agg_runs)
        delta = evaluate_metric(f"mondelta:main/W={rate}", agg_runs)
        deltas.append((rate, mon, delta))
        agg_ok = agg_ok and mon >= 0.95 and delta >= 0.75
    ok = abs(public - 0.07) <= 0.04 and abs(monetized - 0.82) <= 0.05 and agg_ok
    report(4, "monetized discrepancy", ok,
           f"baseline pub={public:.3f} mon={monetized:.3f}; aggressive "
           + " ".join(f"W={r}:mon={m:.2f},gap={d:.2f}" for r, m, d in deltas))


def test_criterion_05_blacklisting_timeline(all_runs):
    scenario, runs = all_runs["ip-blacklisting"]
    result = next(iter(runs.values())).bindings["main"]
    s1 = result.rfn_series("conservative-1")
    s2 = result.rfn_series("conservative-2")
    ip1_ok = all(c == 1 for c in s1.counted)
    ip2_ok = all(
        (c == 0) if 9 <= d <= 26 else (c == 1)
        for d, c in zip(s2.days, s2.counted)
    )
    report(5, "blacklisting timeline", ip1_ok and ip2_ok,
           f"ip1 all counted={ip1_ok}, ip2 zero exactly days 9-26={ip2_ok}")


def test_criterion_06_multi_ip(all_runs):
    scenario, runs = all_runs["multi-ip"]
    medians = {k: evaluate_metric(f"median:main/K={k}", runs) for k in (10, 20, 40)}
    linear = {k: evaluate_metric(f"linear:main/K={k}", runs) for k in (10, 20, 40)}
    ok = all(v >= 0.73 for v in medians.values()) and all(
        v >= 0.999 for v in linear.values()
    )
    report(6, "multi-ip", ok,
           f"medians={[f'{v:.2f}' for v in medians.values()]} "
           f"linearity={[f'{v:.4f}' for v in linear.values()]}")


def test_criterion_07_nat(all_runs):
    scenario, runs = all_runs["nat"]
    loc = {
        name: evaluate_metric(f"median:main/{name}", runs)
        for name in ("loc1", "loc2", "loc3")
    }
    workday = evaluate_metric("workdaymedian:main/long", runs)
    dayoff = evaluate_metric("dayoffmedian:main/long", runs)
    ok = (
        abs(loc["loc1"] - 0.90) <= 0.03
        and abs(loc["loc2"] - 0.43) <= 0.03
        and abs(loc["loc3"] - 0.36) <= 0.03
        and dayoff <= 0.05
        and abs(workday - 0.60) <= 0.05
    )
    report(7, "nat", ok,
           f"loc1={loc['loc1']:.3f} loc2={loc['loc2']:.3f} loc3={loc['loc3']:.3f} "
           f"workday={workday:.3f} dayoff={dayoff:.3f}")


def test_criterion_08_detection_time(all_runs):
    scenario, runs = all_runs["detection-time"]
    ok = True
    for rate in (3, 5, 7, 10, 15, 20, 25):
        clean = evaluate_metric(f"firstpunish:main/clean-W={rate}", runs)
        known_a = evaluate_metric(f"firstpunish:main/known-clean-W={rate}", runs)
        known_b = evaluate_metric(f"firstpunish:main/known-bad-W={rate}", runs)
        ok = ok and clean == 12 and known_a == 1 and known_b == 1
    report(8, "detection time", ok, "clean grace=12 days, known IPs=1 day, all 7 rates")


def test_criterion_09_prefix_isolation(all_runs):
    scenario, runs = all_runs["prefix"]
    ok = all(
        evaluate_metric(f"allcounted:main/A-{bits}", runs) == 1.0
        for bits in range(24, 31)
    )
    # The randomized property version lives in test_audit_properties.
    report(9, "prefix isolation", ok, "neighbor verdicts unchanged for /24../30")


def test_criterion_10_false_positives(all_runs):
    scenario, runs = all_runs["false-positives"]
    cells = {
        ("yt", "social"): 0.024,
        ("yt", "crowd"): 0.103,
        ("dm", "social"): 0.109,
        ("dm", "crowd"): 0.122,
    }
    measured = {}
    ok = True
    for (binding, mix), target in cells.items():
        value = evaluate_metric(f"rfp:{binding}/{mix}", runs)
        measured[(binding, mix)] = value
        ok = ok and value <= 0.12 and abs(value - target) <= 0.05
    report(10, "false positives", ok,
           " ".join(f"{b}/{m}={v:.3f}" for (b, m), v in measured.items()))


def test_criterion_11_advertiser(all_runs):
    scenario, runs = all_runs["advertiser"]
    gaps = {
        v: evaluate_metric(f"mongepub:main/adv-{v}:2-6", runs)
        for v in ("v1", "v2", "v3", "v4")
    }
    delays = {
        v: evaluate_metric(f"suspenddelay:main/up-{v}", runs)
        for v in ("v1", "v2", "v3", "v4")
    }
    retro = {
        v: evaluate_metric(f"retro:main/adv-{v}", runs) for v in ("v3", "v4")
    }
    ok = (
        all(g >= 0 for g in gaps.values())
        and delays["v1"] == -1 and delays["v2"] == -1
        and delays["v3"] == 5 and delays["v4"] == 5
        and all(r == 1.0 for r in retro.values())
    )
    report(11, "advertiser", ok,
           f"mon-pub gaps={ {k: int(v) for k, v in gaps.items()} } "
           f"suspension delays={delays}")


def test_criterion_12_oracle_equivalence_and_replay(all_runs, logs_dir, tmp_path_factory):
    replay_dir = str(tmp_path_factory.mktemp("replay-logs"))
    ok = True
    details = []
    for scenario in catalog():
        run_scenario_all_seeds(scenario, out_dir=replay_dir)
        for seed in scenario.seeds:
            for binding in scenario.bindings:
                rel = os.path.join(scenario.name, f"seed-{seed}", binding.label)
                first = os.path.join(logs_dir, rel)
                second = os.path.join(replay_dir, rel)
                for name in ("events.log", "verdicts.log", "snapshots.csv",
                             "adjustments.log"):
                    with open(os.path.join(first, name), "rb") as fa, open(
                        os.path.join(second, name), "rb"
                    ) as fb:
                        if fa.read() != fb.read():
                            ok = False
                            details.append(f"{rel}/{name} differs")
                snapshots = read_snapshots(first)
                oracle = recompute_counters_from_logs(first)
                for key, value in snapshots.items():
                    if oracle.get(key, (0, 0)) != value:
                        ok = False
                        details.append(f"{rel}: counter mismatch at {key}")
    report(12, "oracle equivalence & replay", ok,
           "all 13 scenarios byte-identical on replay; verdict-scan matches snapshots"
           + ("" if ok else "; " + "; ".join(details[:5])))


def test_zz_summary():
    print()
    for number in sorted(CRITERIA_STATUS):
        print(CRITERIA_STATUS[number])
    assert len(CRITERIA_STATUS) == 12
