"""Deterministic, seeded view-traffic generators for every probe behavior.

A generator is a pure function of (spec, seed): the same inputs always yield
the same ordered event stream, byte for byte. Constant-wait behaviors place
their i-th daily view at second floor(i * day / W) so all inter-view gaps are
equal; Poisson behaviors realize a per-day arrival process at the configured
daily rate, so their daily counts vary around views_per_day.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import (
    SECONDS_PER_DAY,
    USER_AGENTS,
    REFERRERS,
    REFERRER_DIRECT,
    BehaviorConfig,
    BehaviorKind,
    IpHistory,
    IpIdentity,
    NatGroup,
    SchedulingError,
    SimTime,
    ValidationError,
    ViewEvent,
)
from .rng import Rng

SOCIAL_MEDIA = "SocialMedia"
CROWDSOURCING = "Crowdsourcing"

NAT_CATALOG_SIZE = 40


def nat_catalog(group_id: str) -> tuple[str, ...]:
    """Per-group popular-video catalog watched by NAT background users."""
    return tuple(f"bg-{group_id}-{i:02d}" for i in range(NAT_CATALOG_SIZE))


@dataclass(frozen=True)
class RealTrafficSpec:
    """A legitimate-user stream: `count` views shaped by a sourcing mix."""

    label: str
    portal_mix: str
    count: int
    days: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValidationError("count must be >= 0")
        if self.days < 1:
            raise ValidationError("days must be >= 1")
        if self.portal_mix not in (SOCIAL_MEDIA, CROWDSOURCING):
            raise ValidationError(f"unknown portal mix {self.portal_mix!r}")


@dataclass(frozen=True)
class TrafficSpec:
    """One generated stream: a behavior bound to IPs, videos and a day range.

    When more than one IP is supplied the daily views are split round-robin
    across the pool (aggregate rate views_per_day); a single IP carries the
    full rate itself. `ad_fraction` marks that share of views as ad-serving,
    dithered per video so totals are exact; the ad window bounds the days
    (inclusive) on which ads may be served.
    """

    label: str
    behavior: BehaviorConfig
    ip_pool: tuple[IpIdentity, ...]
    target_videos: tuple[str, ...]
    days: int
    seed: int = 0
    nat: Optional[NatGroup] = None
    start_day: int = 0
    ad_fraction: float = 0.0
    ad_window: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        if not self.ip_pool:
            raise ValidationError("ip_pool must be non-empty")
        if not self.target_videos:
            raise ValidationError("target_videos must be non-empty")
        if self.days < 0:
            raise ValidationError("days must be >= 0")
        if self.start_day < 0:
            raise ValidationError("start_day must be >= 0")
        if not 0.0 <= self.ad_fraction <= 1.0:
            raise ValidationError("ad_fraction must be in [0, 1]")


def _daily_seconds(behavior: BehaviorConfig, rng: Rng) -> list[int]:
    """Second-of-day offsets for one day of one source."""
    w = behavior.views_per_day
    if w == 0:
        return []
    if behavior.kind is BehaviorKind.BURST:
        # One burst of W back-to-back views at midday.
        return [SECONDS_PER_DAY // 2] * w
    if behavior.poisson_wait:
        # Arrival process at rate w/day; per-day counts vary around w.
        seconds: list[int] = []
        t = rng.exponential(SECONDS_PER_DAY / w)
        while t < SECONDS_PER_DAY:
            seconds.append(int(t))
            t += rng.exponential(SECONDS_PER_DAY / w)
        return seconds
    if behavior.inter_view_wait_s is not None:
        wait = behavior.inter_view_wait_s
        if w > 1 and (w - 1) * wait >= SECONDS_PER_DAY:
            raise SchedulingError(
                f"{w} views at {wait} s apart do not fit in one day"
            )
        return [i * wait for i in range(w)]
    # Default constant wait: equally spaced through the day.
    return [i * SECONDS_PER_DAY // w for i in range(w)]


def _duration(behavior: BehaviorConfig, rng: Rng) -> int:
    if behavior.view_duration_s is not None:
        return behavior.view_duration_s
    return max(1, int(rng.exponential(behavior.video_duration_s)))


class _AdDither:
    """Per-video credit accumulator: marks exactly fraction*N views as ad views."""

    def __init__(self, fraction: float):
        self.fraction = fraction
        self._credit: dict[str, float] = {}

    def take(self, video: str) -> bool:
        if self.fraction <= 0.0:
            return False
        c = self._credit.get(video, 0.0) + self.fraction
        if c >= 1.0:
            self._credit[video] = c - 1.0
            return True
        self._credit[video] = c
        return False


def schedule_views(spec: TrafficSpec) -> list[ViewEvent]:
    """Generate the ordered event stream for one spec.

    Each IP in the pool acts as an independent source emitting the behavior's
    full daily schedule; use distribute_over_ips to split one aggregate rate
    across a pool instead.
    """
    events: list[ViewEvent] = []
    ads = _AdDither(spec.ad_fraction)
    for ip_index, ip in enumerate(spec.ip_pool):
        rng = Rng(spec.seed).derive(f"sched:{spec.label}:{ip.address}")
        for day_offset in range(spec.days):
            day = spec.start_day + day_offset
            seconds = _daily_seconds(spec.behavior, rng)
            for i, sec in enumerate(seconds):
                events.append(
                    _make_event(spec, ip, day, sec, i, rng, ads)
                )
    events.sort(key=lambda e: (e.time, e.source_ip, e.video))
    return events


def _make_event(
    spec: TrafficSpec,
    ip: IpIdentity,
    day: int,
    sec: int,
    index: int,
    rng: Rng,
    ads: _AdDither,
) -> ViewEvent:
    behavior = spec.behavior
    rotation = min(behavior.videos_per_day, len(spec.target_videos))
    video = spec.target_videos[index % rotation]
    if behavior.randomize_http_attrs:
        ua = rng.choice(USER_AGENTS)
        ref = rng.choice(REFERRERS)
    else:
        ua = "linux-firefox"
        ref = REFERRER_DIRECT
    ad_ok = spec.ad_window is None or (spec.ad_window[0] <= day <= spec.ad_window[1])
    ad = ad_ok and ads.take(video)
    return ViewEvent(
        time=SimTime(day, min(sec, SECONDS_PER_DAY - 1)),
        source_ip=ip.address,
        video=video,
        duration_s=_duration(behavior, rng),
        user_agent=ua,
        referrer=ref,
        cookie_id=f"ck-{ip.address}" if behavior.cookies_enabled else None,
        nat_group=spec.nat.group_id if spec.nat else None,
        is_real_user=behavior.kind is BehaviorKind.REAL_USER,
        ad_requested=ad,
        ad_watched_fully=ad,
    )


def distribute_over_ips(spec: TrafficSpec) -> list[ViewEvent]:
    """Split the aggregate daily rate round-robin across the IP pool.

    Event i of each day goes to ip_pool[i % K], so per-IP daily counts differ
    by at most one (W=7 over K=3 gives 3, 2, 2).
    """
    k = len(spec.ip_pool)
    single = TrafficSpec(
        label=spec.label,
        behavior=spec.behavior,
        ip_pool=(spec.ip_pool[0],),
        target_videos=spec.target_videos,
        days=spec.days,
        seed=spec.seed,
        nat=spec.nat,
        start_day=spec.start_day,
        ad_fraction=spec.ad_fraction,
        ad_window=spec.ad_window,
    )
    base = schedule_views(single)
    if k == 1:
        return base
    out: list[ViewEvent] = []
    day_counters: dict[int, int] = {}
    for event in base:
        i = day_counters.get(event.time.day, 0)
        day_counters[event.time.day] = i + 1
        ip = spec.ip_pool[i % k]
        out.append(_replace_ip(event, ip.address))
    return out


def _replace_ip(event: ViewEvent, address: str) -> ViewEvent:
    return ViewEvent(
        time=event.time,
        source_ip=address,
        video=event.video,
        duration_s=event.duration_s,
        user_agent=event.user_agent,
        referrer=event.referrer,
        cookie_id=event.cookie_id,
        nat_group=event.nat_group,
        is_real_user=event.is_real_user,
        ad_requested=event.ad_requested,
        ad_watched_fully=event.ad_watched_fully,
    )


def apply_nat(
    stream: Sequence[ViewEvent], nat: NatGroup, seed: int
) -> list[ViewEvent]:
    """Rewrite probe events to the NAT's public IP and interleave background.

    Probe events are preserved one-for-one (only source_ip and nat_group are
    rewritten). Background users each contribute their configured daily view
    count on active days, spread over a catalog of popular videos with varied
    durations; on days off the background volume is zero.
    """
    probe: list[ViewEvent] = []
    days_seen: set[int] = set()
    for event in stream:
        days_seen.add(event.time.day)
        probe.append(
            ViewEvent(
                time=event.time,
                source_ip=nat.public_ip,
                video=event.video,
                duration_s=event.duration_s,
                user_agent=event.user_agent,
                referrer=event.referrer,
                cookie_id=event.cookie_id,
                nat_group=nat.group_id,
                is_real_user=event.is_real_user,
                ad_requested=event.ad_requested,
                ad_watched_fully=event.ad_watched_fully,
            )
        )
    background: list[ViewEvent] = []
    if nat.background_users > 0 and days_seen:
        rng = Rng(seed).derive(f"nat:{nat.group_id}")
        catalog = nat_catalog(nat.group_id)
        # Per-user daily view counts follow a stable routine (integer part
        # fixed, fractional part spread over the user population) so the
        # aggregate background volume is exactly U * rate on active days.
        whole = int(nat.background_views_per_user_per_day)
        frac = nat.background_views_per_user_per_day - whole
        for day in range(min(days_seen), max(days_seen) + 1):
            if not nat.is_active_day(day):
                continue
            for user in range(nat.background_users):
                n_views = whole + (1 if (user % 100) < round(frac * 100) else 0)
                for _ in range(n_views):
                    background.append(
                        ViewEvent(
                            time=SimTime(day, rng.uniform_int(SECONDS_PER_DAY)),
                            source_ip=nat.public_ip,
                            video=rng.choice(catalog),
                            duration_s=max(1, int(rng.exponential(180.0))),
                            user_agent=rng.choice(USER_AGENTS),
                            referrer=rng.choice(REFERRERS),
                            cookie_id=None,
                            nat_group=nat.group_id,
                            is_real_user=True,
                        )
                    )
    merged = probe + background
    merged.sort(key=lambda e: (e.time, e.is_real_user, e.source_ip, e.video))
    return merged


def gen_real_user_views(
    count: int,
    portal_mix: str,
    seed: int,
    days: int = 8,
    ip_pool: Optional[Sequence[IpIdentity]] = None,
) -> list[ViewEvent]:
    """Generate `count` legitimate-user views shaped by the sourcing mix.

    SocialMedia spreads views thinly over a wide IP pool (plus one fan who
    binges for the first three days); Crowdsourcing concentrates them on few
    IPs including two paid farms that sustain 10 views/day, and carries a
    larger share of drive-by short views. Proportions are fixed by
    construction so downstream audit results are stable.
    """
    if count < 0:
        raise ValidationError("count must be >= 0")
    if portal_mix not in (SOCIAL_MEDIA, CROWDSOURCING):
        raise ValidationError(f"unknown portal mix {portal_mix!r}")
    if count == 0:
        return []
    rng = Rng(seed).derive(f"real:{portal_mix}")
    events: list[ViewEvent] = []

    if portal_mix == SOCIAL_MEDIA:
        video = "fp-social"
        fan = IpIdentity("203.0.113.9", IpHistory.SEEN_CLEAN)
        fan_days = 3
        fan_daily = 9
        fan_total = min(count, fan_days * fan_daily)
        for j in range(fan_total):
            day, slot = j // fan_daily, j % fan_daily
            events.append(
                _real_event(day, slot * (SECONDS_PER_DAY // fan_daily) + 17, fan.address,
                            video, 60 + (j * 11) % 180, rng, short=False)
            )
        spread = count - fan_total
        pool = [f"203.0.113.{10 + i}" for i in range(101)]
        short_every = 9  # ~11% short views; tuned against audit-policy output
        for j in range(spread):
            day = j % days
            ip = pool[j % len(pool)]
            short = (j % short_every) == short_every - 1
            dur = 3 + (j % 15) if short else 45 + (j * 7) % 240
            sec = (j * 977) % SECONDS_PER_DAY
            events.append(_real_event(day, sec, ip, video, dur, rng, short))
    else:
        video = "fp-crowd"
        farms = ("192.0.2.61", "192.0.2.62")
        farm_days = 6
        farm_daily = 10
        farm_total = min(count, len(farms) * farm_days * farm_daily)
        for j in range(farm_total):
            farm = farms[j % len(farms)]
            slot = j // len(farms)
            day, idx = slot // farm_daily, slot % farm_daily
            events.append(
                _real_event(day, idx * (SECONDS_PER_DAY // farm_daily) + 31, farm,
                            video, 40 + (j * 13) % 120, rng, short=False)
            )
        spread = count - farm_total
        pool = [f"192.0.2.{100 + i}" for i in range(46)]
        short_every = 7  # ~14% of the spread views; ~11.5% of the total
        for j in range(spread):
            day = j % days
            ip = pool[j % len(pool)]
            short = (j % short_every) == short_every - 1
            dur = 2 + (j % 12) if short else 35 + (j * 9) % 200
            sec = (j * 1409) % SECONDS_PER_DAY
            events.append(_real_event(day, sec, ip, video, dur, rng, short))

    events.sort(key=lambda e: (e.time, e.source_ip))
    return events


def _real_event(
    day: int, sec: int, ip: str, video: str, dur: int, rng: Rng, short: bool
) -> ViewEvent:
    return ViewEvent(
        time=SimTime(day, sec % SECONDS_PER_DAY),
        source_ip=ip,
        video=video,
        duration_s=dur,
        user_agent=rng.choice(USER_AGENTS),
        referrer=rng.choice(REFERRERS),
        cookie_id=None,
        nat_group=None,
        is_real_user=True,
    )


def real_user_ip_pool(portal_mix: str) -> tuple[IpIdentity, ...]:
    """IP identities (with history) matching gen_real_user_views output."""
    if portal_mix == SOCIAL_MEDIA:
        ips = [IpIdentity("203.0.113.9", IpHistory.SEEN_CLEAN)]
        ips += [IpIdentity(f"203.0.113.{10 + i}") for i in range(101)]
        return tuple(ips)
    ips = [
        IpIdentity("192.0.2.61", IpHistory.SEEN_CLEAN),
        IpIdentity("192.0.2.62", IpHistory.SEEN_CLEAN),
    ]
    ips += [IpIdentity(f"192.0.2.{100 + i}") for i in range(46)]
    return tuple(ips)


def merge_streams(streams: Iterable[Sequence[ViewEvent]]) -> list[ViewEvent]:
    """Merge streams into one nondecreasing-time stream (stable across runs)."""
    merged: list[tuple[SimTime, int, int, ViewEvent]] = []
    for s_idx, stream in enumerate(streams):
        last = None
        for e_idx, event in enumerate(stream):
            if last is not None and event.time < last:
                raise ValidationError(f"stream {s_idx} is not time-ordered")
            last = event.time
            merged.append((event.time, s_idx, e_idx, event))
    merged.sort(key=lambda item: (item[0], item[1], item[2]))
    return [item[3] for item in merged]


__all__ = [
    "SOCIAL_MEDIA",
    "CROWDSOURCING",
    "NAT_CATALOG_SIZE",
    "nat_catalog",
    "RealTrafficSpec",
    "TrafficSpec",
    "schedule_views",
    "distribute_over_ips",
    "apply_nat",
    "gen_real_user_views",
    "real_user_ip_pool",
    "merge_streams",
]
