"""The named scenario catalog.

Each scenario pins its traffic shapes, policy bindings, seeds and expected
metrics. Sweep scenarios that feed the curve fit aggregate a bank of parallel
single-IP probes per rate so the reported medians resolve fractions finer
than one probe's integer daily counts.
"""

from __future__ import annotations

from .audit import PORTAL_DAILYMOTION_LIKE, PORTAL_PERMISSIVE, PORTAL_YOUTUBE_LIKE
from .engine import Expectation, PolicyBinding, Scenario, VideoInfo
from .model import (
    BehaviorConfig,
    BehaviorKind,
    IpHistory,
    IpIdentity,
    NatGroup,
    PATTERN_WORKWEEK,
)
from .traffic import CROWDSOURCING, SOCIAL_MEDIA, RealTrafficSpec, TrafficSpec

DECAY_SWEEP_RATES = (1, 4, 7, 8, 9, 10, 20, 30, 40, 50, 60)
SWEEP_PROBES = 24
MULTI_VIDEO_GRID = (1, 3, 5, 7, 10, 15, 20)
MULTI_IP_GROUPS = (10, 20, 40)
MONETIZED_SWEEP_RATES = (40, 60, 80, 100, 150)
DETECTION_RATES = (3, 5, 7, 10, 15, 20, 25)


def _deterministic(views_per_day: int, videos: int = 1) -> BehaviorConfig:
    return BehaviorConfig(
        kind=BehaviorKind.DETERMINISTIC,
        views_per_day=views_per_day,
        videos_per_day=videos,
        view_duration_s=40,
    )


def _probe_bank(
    label: str, rate: int, count: int, history: IpHistory, ip_block: int,
    video_prefix: str, days: int,
) -> list[TrafficSpec]:
    """`count` independent single-IP single-video probes sharing one label."""
    specs = []
    for i in range(count):
        ip = IpIdentity(f"10.{ip_block}.{i // 250}.{1 + i % 250}", history)
        specs.append(
            TrafficSpec(
                label=label,
                behavior=_deterministic(rate),
                ip_pool=(ip,),
                target_videos=(f"{video_prefix}-{i:02d}",),
                days=days,
            )
        )
    return specs


def _decay_curve() -> Scenario:
    traffic = []
    expected = []
    for wi, rate in enumerate(DECAY_SWEEP_RATES):
        traffic.extend(
            _probe_bank(
                f"W={rate}", rate, SWEEP_PROBES, IpHistory.SEEN_MISBEHAVING,
                100 + wi, f"dcv-{rate}", days=8,
            )
        )
        if rate <= 8:
            expected.append(Expectation(f"median:main/W={rate}", "eq", 1.0))
        elif rate >= 30:
            expected.append(Expectation(f"median:main/W={rate}", "le", 0.01))
    expected += [
        Expectation("fitthr:main", "eq", 8.0),
        Expectation("fitk:main", "approx", 0.455, 0.02),
        Expectation("fitr2:main", "ge", 0.99),
    ]
    return Scenario(
        name="decay-curve",
        description="Single-video daily-rate sweep tracing the pass-fraction knee",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[501],
        expected=expected,
    )


def _behaviors() -> Scenario:
    def ip(i: int, history=IpHistory.SEEN_CLEAN) -> tuple[IpIdentity, ...]:
        return (IpIdentity(f"198.51.100.{10 + i}", history),)

    behaviors = {
        "D": _deterministic(20),
        "B": BehaviorConfig(kind=BehaviorKind.BURST, views_per_day=20, view_duration_s=40),
        "P": BehaviorConfig(
            kind=BehaviorKind.POISSON_WAIT, views_per_day=20, view_duration_s=40,
            poisson_wait=True,
        ),
        "SV": BehaviorConfig(
            kind=BehaviorKind.SHORT_VIEWS, views_per_day=20, view_duration_s=1
        ),
        "CK": BehaviorConfig(
            kind=BehaviorKind.COOKIES, views_per_day=20, view_duration_s=40,
            cookies_enabled=True,
        ),
        "C": BehaviorConfig(
            kind=BehaviorKind.COMPLETE, views_per_day=20, view_duration_s=None,
            video_duration_s=300, poisson_wait=True, randomize_http_attrs=True,
        ),
    }
    traffic = [
        TrafficSpec(
            label=code, behavior=config, ip_pool=ip(i),
            target_videos=(f"bhv-{code.lower()}",), days=8,
        )
        for i, (code, config) in enumerate(behaviors.items())
    ]
    expected = [
        Expectation("median:main/C", "approx", 0.40, 0.05),
        Expectation("median:main/B", "le", 0.04),
        Expectation("median:main/D", "approx", 0.07, 0.04),
        Expectation("median:main/SV", "approx", 0.06, 0.04),
        Expectation("absdiff:main/CK|D", "le", 0.02),
    ]
    return Scenario(
        name="behaviors",
        description="Six probe behaviors at 20 views/day for 8 days",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        repeats=3,
        seeds=[311, 312, 313],
        expected=expected,
    )


def _portals_public() -> Scenario:
    rates = (100, 400, 500)
    traffic = [
        TrafficSpec(
            label=f"W={rate}",
            behavior=_deterministic(rate),
            ip_pool=(IpIdentity(f"198.51.100.{30 + i}", IpHistory.SEEN_CLEAN),),
            target_videos=(f"pp-{rate}",),
            days=8,
        )
        for i, rate in enumerate(rates)
    ]
    bindings = [
        PolicyBinding("yt", PORTAL_YOUTUBE_LIKE, list(traffic)),
        PolicyBinding("dm", PORTAL_DAILYMOTION_LIKE, list(traffic)),
        PolicyBinding("perm", PORTAL_PERMISSIVE, list(traffic)),
    ]
    expected = [Expectation(f"median:yt/W={r}", "le", 0.01) for r in rates]
    expected += [
        Expectation("median:dm/W=100", "approx", 1.00, 0.02),
        Expectation("median:dm/W=400", "approx", 0.93, 0.02),
        Expectation("median:dm/W=500", "approx", 0.85, 0.02),
    ]
    expected += [Expectation(f"median:perm/W={r}", "ge", 0.95) for r in rates]
    return Scenario(
        name="portals-public",
        description="Public-counter response of three portal policies to aggressive rates",
        bindings=bindings,
        seeds=[521],
        expected=expected,
    )


def _false_positives() -> Scenario:
    traffic = [
        RealTrafficSpec("social", SOCIAL_MEDIA, 330, days=8),
        RealTrafficSpec("crowd", CROWDSOURCING, 599, days=8),
    ]
    bindings = [
        PolicyBinding("yt", PORTAL_YOUTUBE_LIKE, list(traffic)),
        PolicyBinding("dm", PORTAL_DAILYMOTION_LIKE, list(traffic)),
    ]
    expected = [
        Expectation("rfp:yt/social", "approx", 0.024, 0.05),
        Expectation("rfp:yt/crowd", "approx", 0.103, 0.05),
        Expectation("rfp:dm/social", "approx", 0.109, 0.05),
        Expectation("rfp:dm/crowd", "approx", 0.122, 0.05),
        Expectation("rfp:yt/social", "le", 0.12),
        Expectation("rfp:yt/crowd", "le", 0.12),
        Expectation("rfp:dm/social", "le", 0.12),
        Expectation("rfp:dm/crowd", "le", 0.12),
    ]
    return Scenario(
        name="false-positives",
        description="Real-user streams from two sourcing mixes under two policies",
        bindings=bindings,
        seeds=[541],
        expected=expected,
    )


def _monetized_baseline() -> Scenario:
    traffic = [
        TrafficSpec(
            label="main",
            behavior=_deterministic(20),
            ip_pool=(IpIdentity("198.51.100.50", IpHistory.SEEN_CLEAN),),
            target_videos=("mb-main",),
            days=20,
            ad_fraction=1.0,
        )
    ]
    bindings = [
        PolicyBinding("yt", PORTAL_YOUTUBE_LIKE, list(traffic)),
        PolicyBinding("dm", PORTAL_DAILYMOTION_LIKE, list(traffic)),
    ]
    expected = [
        Expectation("median:yt/main", "approx", 0.07, 0.04),
        Expectation("monmedian:yt/main", "approx", 0.82, 0.05),
        Expectation("median:dm/main", "approx", 1.00, 0.02),
        Expectation("monmedian:dm/main", "approx", 0.72, 0.05),
    ]
    return Scenario(
        name="monetized-baseline",
        description="Public vs monetized counting at 20 views/day for 20 days",
        bindings=bindings,
        seeds=[561],
        expected=expected,
    )


def _monetized_aggressive() -> Scenario:
    traffic = [
        TrafficSpec(
            label=f"W={rate}",
            behavior=_deterministic(rate),
            ip_pool=(IpIdentity(f"198.51.100.{60 + i}", IpHistory.SEEN_CLEAN),),
            target_videos=(f"ma-{rate}",),
            days=10,
            ad_fraction=1.0,
        )
        for i, rate in enumerate(MONETIZED_SWEEP_RATES)
    ]
    expected = []
    for rate in MONETIZED_SWEEP_RATES:
        expected.append(Expectation(f"monmedian:main/W={rate}", "ge", 0.95))
        expected.append(Expectation(f"mondelta:main/W={rate}", "ge", 0.75))
    return Scenario(
        name="monetized-aggressive",
        description="Monetized permissiveness at rates from 40 to 150 views/day",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[571],
        expected=expected,
    )


def _multi_video() -> Scenario:
    traffic = []
    block = 0
    for w in MULTI_VIDEO_GRID:
        for d in MULTI_VIDEO_GRID:
            if w < d:
                continue
            ip = IpIdentity(f"10.80.{block // 250}.{1 + block % 250}", IpHistory.SEEN_CLEAN)
            block += 1
            videos = tuple(f"mvd-{w}-{d}-{j}" for j in range(d))
            traffic.append(
                TrafficSpec(
                    label=f"W={w},D={d}",
                    behavior=_deterministic(w, videos=d),
                    ip_pool=(ip,),
                    target_videos=videos,
                    days=7,
                )
            )
    expected = [
        Expectation("median:main/W=15,D=3", "eq", 1.0),
        Expectation("median:main/W=20,D=5", "approx", 0.103, 0.05),
        Expectation("median:main/W=20,D=1", "approx", 0.05, 0.05),
    ]
    return Scenario(
        name="multi-video",
        description="28 rate/video-spread combinations over 7 days",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[581],
        expected=expected,
    )


def _multi_ip() -> Scenario:
    traffic = []
    for gi, k in enumerate(MULTI_IP_GROUPS):
        pool = tuple(
            IpIdentity(f"10.9{gi}.{i // 250}.{1 + i % 250}", IpHistory.SEEN_CLEAN)
            for i in range(k)
        )
        traffic.append(
            TrafficSpec(
                label=f"K={k}",
                behavior=_deterministic(3),
                ip_pool=pool,
                target_videos=(f"mip-{k}",),
                days=8,
            )
        )
    expected = []
    for k in MULTI_IP_GROUPS:
        expected.append(Expectation(f"median:main/K={k}", "ge", 0.73))
        expected.append(Expectation(f"linear:main/K={k}", "ge", 0.999))
    return Scenario(
        name="multi-ip",
        description="One video fed 3 views/day from each of 10, 20 and 40 IPs",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[591],
        expected=expected,
    )


def _ip_blacklisting() -> Scenario:
    conservative = BehaviorConfig(
        kind=BehaviorKind.CONSERVATIVE, views_per_day=1, view_duration_s=40
    )
    aggressive = BehaviorConfig(
        kind=BehaviorKind.AGGRESSIVE, views_per_day=30, view_duration_s=40
    )
    ip1 = IpIdentity("198.51.100.201")
    ip2 = IpIdentity("198.51.100.202")
    traffic = [
        TrafficSpec("conservative-1", conservative, (ip1,), ("ibl-a",), days=34),
        TrafficSpec("conservative-2", conservative, (ip2,), ("ibl-b",), days=34),
        TrafficSpec("aggressive", aggressive, (ip2,), ("ibl-c",), days=17, start_day=8),
    ]
    expected = [
        Expectation("allcounted:main/conservative-1", "eq", 1.0),
        Expectation("timeline:main/conservative-2:9-26", "eq", 1.0),
    ]
    return Scenario(
        name="ip-blacklisting",
        description="A second IP turning aggressive contaminates its own clean probe",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[601],
        expected=expected,
    )


def _nat() -> Scenario:
    locations = (
        ("loc1", 20, 50, 8, "203.0.113.31"),
        ("loc2", 75, 100, 8, "203.0.113.32"),
        ("loc3", 100, 50, 8, "203.0.113.33"),
    )
    traffic = []
    for label, rate, users, days, public_ip in locations:
        nat = NatGroup(
            group_id=label, public_ip=public_ip, background_users=users,
            background_views_per_user_per_day=8.0,
        )
        traffic.append(
            TrafficSpec(
                label=label,
                behavior=_deterministic(rate),
                ip_pool=(IpIdentity(f"10.200.0.{len(traffic) + 1}"),),
                target_videos=(f"nat-{label}",),
                days=days,
                nat=nat,
            )
        )
    long_nat = NatGroup(
        group_id="long", public_ip="203.0.113.34", background_users=105,
        background_views_per_user_per_day=8.0, active_day_pattern=PATTERN_WORKWEEK,
    )
    traffic.append(
        TrafficSpec(
            label="long",
            behavior=_deterministic(60),
            ip_pool=(IpIdentity("10.200.0.9"),),
            target_videos=("nat-long",),
            days=194,
            nat=long_nat,
        )
    )
    expected = [
        Expectation("median:main/loc1", "approx", 0.90, 0.03),
        Expectation("median:main/loc2", "approx", 0.43, 0.03),
        Expectation("median:main/loc3", "approx", 0.36, 0.03),
        Expectation("workdaymedian:main/long", "approx", 0.60, 0.05),
        Expectation("dayoffmedian:main/long", "le", 0.05),
    ]
    return Scenario(
        name="nat",
        description="Probes hidden behind NATed networks of varying cover volume",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[611],
        expected=expected,
    )


def _prefix() -> Scenario:
    conservative = BehaviorConfig(
        kind=BehaviorKind.CONSERVATIVE, views_per_day=1, view_duration_s=40
    )
    traffic = []
    expected = []
    for x in range(24, 31):
        block = 1 << (32 - x)
        # Aligned pair inside one /x: the neighbor sits at the block's far end.
        base = (10 << 24) | (61 << 16) | ((x - 24) << 8)
        addr_a = _int_to_ip(base + 1)
        addr_b = _int_to_ip(base + max(2, block - 2))
        traffic.append(
            TrafficSpec(
                f"A-{x}", conservative,
                (IpIdentity(addr_a),), (f"pfx-a-{x}",), days=12,
            )
        )
        traffic.append(
            TrafficSpec(
                f"B-{x}", _deterministic(20),
                (IpIdentity(addr_b, IpHistory.SEEN_CLEAN),), (f"pfx-b-{x}",),
                days=9, start_day=3,
            )
        )
        expected.append(Expectation(f"allcounted:main/A-{x}", "eq", 1.0))
    return Scenario(
        name="prefix",
        description="Misbehavior on one address never spills onto prefix neighbors",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[621],
        expected=expected,
    )


def _int_to_ip(value: int) -> str:
    return ".".join(str((value >> shift) & 0xFF) for shift in (24, 16, 8, 0))


def _detection_time() -> Scenario:
    histories = (
        ("clean", IpHistory.NEVER_SEEN, "192.0.2.10", 12),
        ("known-clean", IpHistory.SEEN_CLEAN, "192.0.2.11", 1),
        ("known-bad", IpHistory.SEEN_MISBEHAVING, "192.0.2.12", 1),
    )
    traffic = []
    expected = []
    for name, history, address, delay in histories:
        ip = IpIdentity(address, history)
        for rate in DETECTION_RATES:
            traffic.append(
                TrafficSpec(
                    label=f"{name}-W={rate}",
                    behavior=_deterministic(rate),
                    ip_pool=(ip,),
                    target_videos=(f"dt-{name}-{rate}",),
                    days=16,
                )
            )
            expected.append(
                Expectation(f"firstpunish:main/{name}-W={rate}", "eq", float(delay))
            )
    return Scenario(
        name="detection-time",
        description="Punishment onset by IP history across seven daily rates",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic)],
        seeds=[631],
        expected=expected,
    )


def _advertiser() -> Scenario:
    ad_days = (2, 6)
    configs = (
        # label, ips, views/day per ip, total ad views over the window
        ("v1", 1, 10, 31),
        ("v2", 1, 20, 60),
        ("v3", 8, 10, 178),
        ("v4", 2, 70, 15),
    )
    traffic = []
    videos = {}
    expected = []
    window = f"{ad_days[0]}-{ad_days[1]}"
    n_ad_days = ad_days[1] - ad_days[0] + 1
    for vi, (label, n_ips, rate, ad_total) in enumerate(configs):
        video = f"adv-{label}"
        pool = tuple(
            IpIdentity(f"10.210.{vi}.{1 + i}", IpHistory.SEEN_CLEAN)
            for i in range(n_ips)
        )
        daily_views = n_ips * rate
        ad_fraction = ad_total / (daily_views * n_ad_days)
        traffic.append(
            TrafficSpec(
                label=label,
                behavior=_deterministic(rate),
                ip_pool=pool,
                target_videos=(video,),
                days=10,
                ad_fraction=ad_fraction,
                ad_window=ad_days,
            )
        )
        videos[video] = VideoInfo(uploader=f"up-{label}", campaign_targeted=True)
        expected.append(Expectation(f"mongepub:main/{video}:{window}", "ge", 0.0))
    expected += [
        Expectation("suspenddelay:main/up-v1", "eq", -1.0),
        Expectation("suspenddelay:main/up-v2", "eq", -1.0),
        Expectation("suspenddelay:main/up-v3", "eq", 5.0),
        Expectation("suspenddelay:main/up-v4", "eq", 5.0),
        Expectation("retro:main/adv-v3", "eq", 1.0),
        Expectation("retro:main/adv-v4", "eq", 1.0),
        Expectation(f"delivered:main/adv-v4:{window}", "eq", 15.0),
    ]
    return Scenario(
        name="advertiser",
        description="Campaign-targeted videos: charged ad views vs public counts",
        bindings=[PolicyBinding("main", PORTAL_YOUTUBE_LIKE, traffic, videos=videos)],
        seeds=[641],
        expected=expected,
    )


def catalog() -> list[Scenario]:
    """All named scenarios, order matching the report bundle."""
    return [
        _portals_public(),
        _false_positives(),
        _monetized_baseline(),
        _behaviors(),
        _decay_curve(),
        _multi_video(),
        _multi_ip(),
        _ip_blacklisting(),
        _nat(),
        _prefix(),
        _detection_time(),
        _monetized_aggressive(),
        _advertiser(),
    ]


def scenario_by_name(name: str) -> Scenario:
    for scenario in catalog():
        if scenario.name == name:
            return scenario
    raise KeyError(name)


__all__ = ["catalog", "scenario_by_name", "DECAY_SWEEP_RATES", "SWEEP_PROBES"]
