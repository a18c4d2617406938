"""Pluggable view-audit policies calibrated to measured portal behavior.

The reference policy tracks every source IP's global daily viewing pattern
and discounts views through a fixed rule order: blacklist, burst, detection
grace, then a per-day pass-fraction branch (single-video decay, multi-video
decay, or NAT masking). Per-event verdicts are optimistic while a day is in
flight ("count first, adjust later"); end_of_day reconciles each (ip, video)
to its exact daily quota and emits reduce-only adjustment records.

Quotas are realized by deterministic credit dithering, never by random
dropping: each (ip, video) accrues fractional pass credit per view and a view
is counted exactly when the accumulated credit crosses an integer. The credit
phase is seeded from a hash of the key, so aggregates over many sources track
the target fraction closely.

Calibration note: an IP whose prior history is merely "seen, clean" keeps a
minimum of one counted view per active day once punished (benefit of the
doubt); an IP already known to have misbehaved is held to the bare decay
quota. The two regimes reproduce the measured single-IP pass rates and the
fitted decay curve respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .model import (
    IpHistory,
    OrderingError,
    SimTime,
    ValidationError,
    ViewEvent,
)
from .rng import hash_to_unit

PORTAL_YOUTUBE_LIKE = "YouTubeLike"
PORTAL_DAILYMOTION_LIKE = "DailymotionLike"
PORTAL_PERMISSIVE = "Permissive"
PORTALS = (PORTAL_YOUTUBE_LIKE, PORTAL_DAILYMOTION_LIKE, PORTAL_PERMISSIVE)


class VerdictReason(Enum):
    PASS = "Pass"
    OVER_SINGLE_VIDEO = "OverSingleVideoThreshold"
    OVER_MULTI_VIDEO = "OverMultiVideoThreshold"
    BURST = "Burst"
    BLACKLISTED = "Blacklisted"
    GRACE = "DetectionDelayGrace"
    NAT_MASKED = "NatMasked"
    REAL_USER_DISCOUNT = "RealUserDiscount"


@dataclass(frozen=True)
class Verdict:
    """Per-event decision: whether the view counts publicly and monetized."""

    count_public: bool
    count_monetized: bool
    reason: VerdictReason

    def __post_init__(self) -> None:
        if self.reason is VerdictReason.PASS and not self.count_public:
            raise ValidationError("Pass verdicts must count publicly")


@dataclass(frozen=True)
class Adjustment:
    """A post-hoc, reduce-only correction to an earlier (video, day) counter."""

    emitted_day: int
    day: int
    video: str
    ip: str
    kind: str  # "public" | "monetized"
    amount: int
    note: str = ""

    def to_line(self) -> str:
        return "\t".join(
            (
                str(self.emitted_day),
                str(self.day),
                self.video,
                self.ip,
                self.kind,
                str(self.amount),
                self.note,
            )
        )

    @classmethod
    def from_line(cls, line: str) -> "Adjustment":
        parts = line.rstrip("\n").split("\t")
        return cls(
            int(parts[0]), int(parts[1]), parts[2], parts[3], parts[4],
            int(parts[5]), parts[6] if len(parts) > 6 else "",
        )


@dataclass
class PolicyParams:
    """Calibration constants for the reference (YouTube-like) audit policy.

    The first block drives the public-counter rules; the second block holds
    the monetized-counter and uploader-suspension calibration; the remaining
    fields calibrate the sibling portal policies.
    """

    single_video_threshold: int = 8
    multi_video_threshold: int = 15
    multi_video_min_d: int = 3
    decay_rate: float = 0.455
    burst_pass_fraction: float = 0.02
    multi_ip_pass_floor: float = 0.73
    randomized_http_pass: float = 0.40
    detection_delay_clean: int = 12
    detection_delay_known: int = 1
    blacklist_release_lag: int = 2
    nat_calibration: tuple[tuple[float, float], ...] = (
        (0.5, 0.36),
        (1.33, 0.43),
        (2.5, 0.90),
    )
    # Thresholds for hard misbehavior and NAT accounting.
    aggressive_daily_views: int = 30
    nat_per_user_daily_views: float = 8.0
    clean_history_daily_floor: int = 1
    # Monetized-counter calibration.
    monetized_base_pass: float = 0.82
    monetized_ramp_per_view: float = 0.0065
    monetized_ramp_start: int = 20
    suspension_cumulative_views: int = 100
    suspension_window_days: int = 5
    suspension_daily_video_rate: int = 70
    suspension_delay_days: int = 5
    # Sibling portal calibration.
    dailymotion_rate_anchors: tuple[tuple[float, float], ...] = (
        (100.0, 1.0),
        (400.0, 0.93),
        (500.0, 0.85),
    )
    dailymotion_monetized_pass: float = 0.72
    dailymotion_min_view_duration_s: int = 30
    permissive_pass: float = 0.97

    def __post_init__(self) -> None:
        fractions = (
            self.burst_pass_fraction,
            self.multi_ip_pass_floor,
            self.randomized_http_pass,
            self.monetized_base_pass,
            self.dailymotion_monetized_pass,
            self.permissive_pass,
        )
        for f in fractions:
            if not 0.0 <= f <= 1.0:
                raise ValidationError(f"fraction out of [0,1]: {f}")
        if self.multi_video_threshold < self.single_video_threshold:
            raise ValidationError("multi_video_threshold must be >= single_video_threshold")
        if self.decay_rate <= 0:
            raise ValidationError("decay_rate must be > 0")
        last_r, last_p = -1.0, -1.0
        for r, p in self.nat_calibration:
            if r <= last_r or p <= last_p:
                raise ValidationError("nat anchors must increase in both coordinates")
            if not 0.0 <= p <= 1.0:
                raise ValidationError("nat anchor fraction out of [0,1]")
            last_r, last_p = r, p

    def with_overrides(self, overrides: Optional[dict] = None) -> "PolicyParams":
        if not overrides:
            return self
        known = set(self.__dataclass_fields__)
        bad = set(overrides) - known
        if bad:
            raise ValidationError(f"unknown policy parameters: {sorted(bad)}")
        merged = {**self.__dict__, **overrides}
        return PolicyParams(**merged)


# ---------------------------------------------------------------------------
# Pass-fraction model
# ---------------------------------------------------------------------------


def decay_fraction(params: PolicyParams, views_per_day: float) -> float:
    """Pass fraction for a single-video daily rate: 1 up to the threshold,
    exponential decay beyond it (continuous at the threshold)."""
    if views_per_day < 0:
        raise ValidationError("views_per_day must be >= 0")
    t1 = params.single_video_threshold
    if views_per_day <= t1:
        return 1.0
    return math.exp(-params.decay_rate * (views_per_day - t1))


def multi_video_fraction(params: PolicyParams, views_per_day: float, videos_per_day: int) -> float:
    """Pass fraction when a source spreads W daily views over D videos.

    Below the multi-video minimum the single-video rule applies unchanged;
    from D >= 3 the trigger moves to the higher multi-video threshold."""
    if videos_per_day < 1:
        raise ValidationError("videos_per_day must be >= 1")
    if views_per_day < videos_per_day:
        raise ValidationError("views_per_day must be >= videos_per_day")
    if videos_per_day < params.multi_video_min_d:
        return decay_fraction(params, views_per_day)
    t2 = params.multi_video_threshold
    if views_per_day <= t2:
        return 1.0
    return math.exp(-params.decay_rate * (views_per_day - t2))


def nat_pass_fraction(params: PolicyParams, probe_views_per_day: float, background_views: float) -> float:
    """Pass fraction for a probe hidden in NAT traffic.

    The background-to-probe ratio r = (background / per-user rate) / probe W
    is mapped through piecewise-linear calibration anchors; the result never
    drops below the bare-IP decay fraction and saturates at the last anchor."""
    if probe_views_per_day <= 0:
        raise ValidationError("probe_views_per_day must be > 0")
    if background_views < 0:
        raise ValidationError("background_views must be >= 0")
    base = decay_fraction(params, probe_views_per_day)
    u_equivalent = background_views / params.nat_per_user_daily_views
    r = u_equivalent / probe_views_per_day
    anchors = params.nat_calibration
    if r <= 0.0:
        return base
    if r >= anchors[-1][0]:
        raw = anchors[-1][1]
    else:
        raw = None
        prev = (0.0, base)
        for anchor in anchors:
            if r <= anchor[0]:
                r0, p0 = prev
                r1, p1 = anchor
                raw = p0 + (p1 - p0) * (r - r0) / (r1 - r0)
                break
            prev = anchor
        assert raw is not None
    return min(1.0, max(raw, base))


def detection_delay(params: PolicyParams, history: IpHistory) -> int:
    """Days of grace between the onset of misbehavior and punishment."""
    if history is IpHistory.NEVER_SEEN:
        return params.detection_delay_clean
    return params.detection_delay_known


def monetized_fraction(params: PolicyParams, views_per_day: float) -> float:
    """Monetized-counter pass fraction; laxer than public and rising with rate."""
    if views_per_day <= params.single_video_threshold:
        return 1.0
    ramp = params.monetized_ramp_per_view * max(0.0, views_per_day - params.monetized_ramp_start)
    return min(1.0, params.monetized_base_pass + ramp)


# ---------------------------------------------------------------------------
# Deterministic credit dithering
# ---------------------------------------------------------------------------


class QuotaDither:
    """Accumulates fractional pass credit per key; integer crossings pass.

    The initial credit is a hash-derived phase in [0, 1), so identical keys
    replay identically while distinct keys spread their crossings evenly."""

    def __init__(self, salt: str):
        self._salt = salt
        self._credit: dict[str, float] = {}

    def take(self, key: str, amount: float) -> int:
        if amount < 0:
            raise ValidationError("credit amount must be >= 0")
        c = self._credit.get(key)
        if c is None:
            c = hash_to_unit(f"{self._salt}:{key}")
        c += amount
        passed = int(c)
        self._credit[key] = c - passed
        return passed

    def state(self) -> dict[str, float]:
        return dict(self._credit)

    def restore(self, state: dict[str, float]) -> None:
        self._credit = dict(state)


# ---------------------------------------------------------------------------
# Per-IP reputation state
# ---------------------------------------------------------------------------


@dataclass
class IpReputationState:
    """Everything the policy remembers about one source IP."""

    history: IpHistory = IpHistory.NEVER_SEEN
    first_seen_day: Optional[int] = None
    suspicious_since: Optional[int] = None
    frozen_delay: Optional[int] = None
    frozen_history: Optional[IpHistory] = None
    first_hard_day: Optional[int] = None
    blacklist_from: Optional[int] = None
    blacklisted_until: Optional[int] = None
    # Open-day trackers, reset at each day close.
    today_seen: dict = field(default_factory=dict)        # video -> views
    today_passed: dict = field(default_factory=dict)      # video -> ingest public passes
    today_ads: dict = field(default_factory=dict)         # video -> fully watched ads
    today_mon_passed: dict = field(default_factory=dict)  # video -> ingest monetized passes
    today_total: int = 0
    today_passed_total: int = 0
    today_real: int = 0
    today_fake: int = 0
    today_nat: bool = False
    today_agents: set = field(default_factory=set)
    today_burst_videos: set = field(default_factory=set)
    _burst_last_s: dict = field(default_factory=dict)     # video -> last arrival (abs s)
    _burst_run: dict = field(default_factory=dict)        # video -> current fast-run length

    def is_blacklisted(self, day: int) -> bool:
        return (
            self.blacklist_from is not None
            and self.blacklisted_until is not None
            and self.blacklist_from <= day <= self.blacklisted_until
        )

    def in_grace(self, day: int) -> bool:
        if self.suspicious_since is None:
            return True
        assert self.frozen_delay is not None
        return day < self.suspicious_since + self.frozen_delay

    def reset_day(self) -> None:
        self.today_seen = {}
        self.today_passed = {}
        self.today_ads = {}
        self.today_mon_passed = {}
        self.today_total = 0
        self.today_passed_total = 0
        self.today_real = 0
        self.today_fake = 0
        self.today_nat = False
        self.today_agents = set()
        self.today_burst_videos = set()
        self._burst_last_s = {}
        self._burst_run = {}


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class AuditPolicy:
    """Common interface: ordered ingest, day-close reconciliation, snapshots."""

    portal = "base"

    def __init__(self, params: Optional[PolicyParams] = None):
        self.params = params or PolicyParams()
        self._last_time: Optional[SimTime] = None
        self._open_day: Optional[int] = None

    # -- shared plumbing ----------------------------------------------------

    def _check_order(self, event: ViewEvent) -> None:
        if self._last_time is not None and event.time < self._last_time:
            raise OrderingError(f"event at {event.time} arrived after {self._last_time}")
        self._last_time = event.time
        if self._open_day is None:
            self._open_day = event.time.day
        elif event.time.day != self._open_day:
            raise OrderingError(
                f"day {self._open_day} not closed before day {event.time.day} events"
            )

    def _close_day_guard(self, day: int) -> None:
        if self._open_day is not None and self._open_day != day:
            raise OrderingError(f"cannot close day {day} while day {self._open_day} is open")
        self._open_day = None

    def register_ip(self, address: str, history: IpHistory) -> None:  # pragma: no cover
        return None

    def register_video(self, video: str, uploader: str, campaign_targeted: bool = False) -> None:
        return None

    def ingest(self, event: ViewEvent) -> Verdict:
        raise NotImplementedError

    def end_of_day(self, day: int) -> list[Adjustment]:
        raise NotImplementedError

    def snapshot(self) -> dict:
        raise NotImplementedError

    def restore(self, state: dict) -> None:
        raise NotImplementedError


class YouTubeLikePolicy(AuditPolicy):
    """Full reference rule engine with IP reputation and monetized auditing."""

    portal = PORTAL_YOUTUBE_LIKE

    def __init__(self, params: Optional[PolicyParams] = None):
        super().__init__(params)
        self._ips: dict[str, IpReputationState] = {}
        self._pub_dither = QuotaDither("pub")
        self._mon_dither = QuotaDither("mon")
        self._video_uploader: dict[str, str] = {}
        self._campaign_videos: set[str] = set()
        self._first_ad_day: dict[str, int] = {}
        self._delivered: dict[str, list] = {}          # uploader -> [(day, count)]
        self._mon_by_video_day: dict[str, dict[int, int]] = {}
        self._suspend_effective: dict[str, int] = {}
        self._suspended: set[str] = set()

    # -- registration -------------------------------------------------------

    def register_ip(self, address: str, history: IpHistory) -> None:
        state = self._ips.setdefault(address, IpReputationState())
        state.history = history

    def register_video(self, video: str, uploader: str, campaign_targeted: bool = False) -> None:
        self._video_uploader[video] = uploader
        if campaign_targeted:
            self._campaign_videos.add(video)

    def _uploader_of(self, video: str) -> str:
        return self._video_uploader.get(video, video)

    # -- ingest --------------------------------------------------------------

    def ingest(self, event: ViewEvent) -> Verdict:
        self._check_order(event)
        state = self._ips.setdefault(event.source_ip, IpReputationState())
        day = event.time.day
        params = self.params

        uploader = self._uploader_of(event.video)
        count_mon = event.ad_watched_fully and uploader not in self._suspended

        # Burst-run tracking (rule 2 input).
        abs_s = event.time.total_seconds()
        last = state._burst_last_s.get(event.video)
        if last is not None and abs_s - last < 2:
            state._burst_run[event.video] = state._burst_run.get(event.video, 1) + 1
        else:
            state._burst_run[event.video] = 1
        state._burst_last_s[event.video] = abs_s
        in_burst_run = state._burst_run[event.video] >= 5
        if in_burst_run:
            state.today_burst_videos.add(event.video)

        if event.nat_group is not None:
            state.today_nat = True
        state.today_agents.add(event.user_agent)

        running_w = state.today_total + 1
        running_d = len(state.today_seen) + (0 if event.video in state.today_seen else 1)

        if state.is_blacklisted(day) and not state.today_nat:
            verdict = Verdict(False, count_mon, VerdictReason.BLACKLISTED)
        elif in_burst_run:
            verdict = Verdict(False, count_mon, VerdictReason.BURST)
        elif state.in_grace(day):
            reason = (
                VerdictReason.GRACE
                if running_w > params.single_video_threshold
                else VerdictReason.PASS
            )
            verdict = Verdict(True, count_mon, reason)
        elif state.today_nat:
            verdict = Verdict(True, count_mon, VerdictReason.NAT_MASKED)
        else:
            target = multi_video_fraction(params, running_w, running_d)
            if len(state.today_agents) >= 3:
                target = max(target, params.randomized_http_pass)
            # Deterministic thinning on the running counted fraction.
            passes = state.today_passed_total <= target * state.today_total
            if passes:
                verdict = Verdict(True, count_mon, VerdictReason.PASS)
            else:
                reason = (
                    VerdictReason.OVER_MULTI_VIDEO
                    if running_d >= params.multi_video_min_d
                    else VerdictReason.OVER_SINGLE_VIDEO
                )
                verdict = Verdict(False, count_mon, reason)

        state.today_seen[event.video] = state.today_seen.get(event.video, 0) + 1
        state.today_total += 1
        if verdict.count_public:
            state.today_passed[event.video] = state.today_passed.get(event.video, 0) + 1
            state.today_passed_total += 1
        if event.ad_watched_fully:
            state.today_ads[event.video] = state.today_ads.get(event.video, 0) + 1
            if verdict.count_monetized:
                state.today_mon_passed[event.video] = (
                    state.today_mon_passed.get(event.video, 0) + 1
                )
        if event.is_real_user:
            state.today_real += 1
        else:
            state.today_fake += 1
        if state.first_seen_day is None:
            state.first_seen_day = day
        return verdict

    # -- day close -----------------------------------------------------------

    def end_of_day(self, day: int) -> list[Adjustment]:
        self._close_day_guard(day)
        adjustments: list[Adjustment] = []
        video_pub_final: dict[str, int] = {}
        video_ads: dict[str, int] = {}
        video_mon_sum: dict[str, int] = {}
        video_mon_ingest: dict[str, int] = {}
        video_fake_views: dict[str, int] = {}

        active = [(ip, s) for ip, s in self._ips.items() if s.today_total > 0]
        for ip, state in active:
            quotas = self._public_quotas(ip, state, day)
            for video, quota in quotas.items():
                ingested = state.today_passed.get(video, 0)
                final = min(quota, ingested)
                delta = ingested - final
                if delta > 0:
                    adjustments.append(
                        Adjustment(day, day, video, ip, "public", delta, "quota")
                    )
                video_pub_final[video] = video_pub_final.get(video, 0) + final
            mon_quotas = self._monetized_quotas(state)
            for video, quota in mon_quotas.items():
                video_mon_sum[video] = video_mon_sum.get(video, 0) + quota
            for video, n in state.today_ads.items():
                video_ads[video] = video_ads.get(video, 0) + n
            for video, n in state.today_mon_passed.items():
                video_mon_ingest[video] = video_mon_ingest.get(video, 0) + n
            for video, n in state.today_seen.items():
                if state.today_fake:
                    video_fake_views[video] = video_fake_views.get(video, 0) + min(
                        n, state.today_fake
                    )

        adjustments.extend(
            self._reconcile_monetized(day, video_pub_final, video_ads,
                                      video_mon_sum, video_mon_ingest)
        )
        adjustments.extend(self._suspension_checks(day, video_fake_views, video_ads))

        for _, state in active:
            self._update_reputation(state, day)
            state.reset_day()
        return adjustments

    def _public_quotas(self, ip: str, state: IpReputationState, day: int) -> dict[str, int]:
        params = self.params
        total = state.today_total
        distinct = len(state.today_seen)
        blacklisted = state.is_blacklisted(day) and not state.today_nat
        grace = state.in_grace(day)
        quotas: dict[str, int] = {}
        floor_eligible: list[str] = []
        for video, seen in sorted(state.today_seen.items()):
            key = f"{ip}|{video}"
            if blacklisted:
                quotas[video] = 0
            elif video in state.today_burst_videos:
                quotas[video] = self._pub_dither.take(key, params.burst_pass_fraction * seen)
            elif grace:
                quotas[video] = seen
            elif state.today_nat:
                fraction = nat_pass_fraction(params, max(1, state.today_fake), state.today_real)
                quotas[video] = self._pub_dither.take(key, fraction * seen)
                floor_eligible.append(video)
            else:
                fraction = multi_video_fraction(params, total, distinct)
                if len(state.today_agents) >= 3:
                    fraction = max(fraction, params.randomized_http_pass)
                quotas[video] = self._pub_dither.take(key, fraction * seen)
                floor_eligible.append(video)
        # Courtesy floor for known-clean IPs: at least one counted view per
        # punished day, attributed to the most-viewed non-burst video.
        if (
            floor_eligible
            and state.frozen_history is IpHistory.SEEN_CLEAN
            and params.clean_history_daily_floor > 0
            and sum(quotas[v] for v in floor_eligible) == 0
        ):
            top = max(floor_eligible, key=lambda v: (state.today_seen[v], v))
            quotas[top] = min(
                params.clean_history_daily_floor, state.today_seen[top]
            )
        return quotas

    def _monetized_quotas(self, state: IpReputationState) -> dict[str, int]:
        params = self.params
        out: dict[str, int] = {}
        for video, ads in sorted(state.today_ads.items()):
            ingested = state.today_mon_passed.get(video, 0)
            if ingested == 0:
                out[video] = 0
                continue
            fraction = monetized_fraction(params, state.today_total)
            # Ads delivered while suspended were already refused at ingest.
            out[video] = min(ingested, self._mon_dither.take(f"m:{video}", fraction * ads))
        return out

    def _reconcile_monetized(
        self,
        day: int,
        video_pub: dict[str, int],
        video_ads: dict[str, int],
        video_mon: dict[str, int],
        video_mon_ingest: dict[str, int],
    ) -> list[Adjustment]:
        adjustments: list[Adjustment] = []
        for video, ads in sorted(video_ads.items()):
            ingested = video_mon_ingest.get(video, 0)
            quota = video_mon.get(video, 0)
            # The monetized counter is never stricter than the public one.
            floor = min(video_pub.get(video, 0), ingested)
            final = max(quota, floor)
            delta = ingested - final
            if delta > 0:
                adjustments.append(
                    Adjustment(day, day, video, "", "monetized", delta, "quota")
                )
            if final > 0:
                per_day = self._mon_by_video_day.setdefault(video, {})
                per_day[day] = per_day.get(day, 0) + final
                uploader = self._uploader_of(video)
                if video in self._campaign_videos:
                    if uploader not in self._first_ad_day:
                        self._first_ad_day[uploader] = day
                    self._delivered.setdefault(uploader, []).append((day, final))
        return adjustments

    def _suspension_checks(
        self, day: int, video_fake_views: dict[str, int], video_ads: dict[str, int]
    ) -> list[Adjustment]:
        params = self.params
        for video in sorted(self._campaign_videos):
            uploader = self._uploader_of(video)
            if uploader in self._suspended or uploader in self._suspend_effective:
                continue
            if uploader not in self._first_ad_day:
                continue
            window_start = day - params.suspension_window_days + 1
            delivered = sum(
                n for d, n in self._delivered.get(uploader, []) if d >= window_start
            )
            heavy_rate = (
                video_ads.get(video, 0) > 0
                and video_fake_views.get(video, 0) >= params.suspension_daily_video_rate
            )
            if delivered >= params.suspension_cumulative_views or heavy_rate:
                self._suspend_effective[uploader] = (
                    self._first_ad_day[uploader] + params.suspension_delay_days
                )
        adjustments: list[Adjustment] = []
        for uploader, effective in sorted(self._suspend_effective.items()):
            if uploader in self._suspended or effective > day + 1:
                continue
            self._suspended.add(uploader)
            for video, per_day in sorted(self._mon_by_video_day.items()):
                if self._uploader_of(video) != uploader:
                    continue
                for target_day, count in sorted(per_day.items()):
                    if count > 0:
                        adjustments.append(
                            Adjustment(day, target_day, video, "", "monetized",
                                       count, "suspension")
                        )
                        per_day[target_day] = 0
        return adjustments

    def _update_reputation(self, state: IpReputationState, day: int) -> None:
        params = self.params
        total = state.today_total
        misbehaving = total > params.single_video_threshold
        if misbehaving and state.suspicious_since is None:
            state.suspicious_since = day
            state.frozen_history = state.history
            state.frozen_delay = detection_delay(params, state.history)
        if (
            total >= params.aggressive_daily_views
            and not state.today_nat
        ):
            if state.first_hard_day is None:
                state.first_hard_day = day
            assert state.suspicious_since is not None and state.frozen_delay is not None
            state.blacklist_from = max(
                state.first_hard_day, state.suspicious_since + state.frozen_delay
            )
            state.blacklisted_until = day + params.blacklist_release_lag
        # History moves forward only.
        if state.history is IpHistory.NEVER_SEEN:
            state.history = (
                IpHistory.SEEN_MISBEHAVING if misbehaving else IpHistory.SEEN_CLEAN
            )
        elif state.history is IpHistory.SEEN_CLEAN and misbehaving:
            state.history = IpHistory.SEEN_MISBEHAVING

    # -- checkpointing --------------------------------------------------------

    def snapshot(self) -> dict:
        if self._open_day is not None:
            raise ValidationError("cannot snapshot mid-day")
        def ip_state(s: IpReputationState) -> dict:
            return {
                "history": s.history.value,
                "first_seen_day": s.first_seen_day,
                "suspicious_since": s.suspicious_since,
                "frozen_delay": s.frozen_delay,
                "frozen_history": s.frozen_history.value if s.frozen_history else None,
                "first_hard_day": s.first_hard_day,
                "blacklist_from": s.blacklist_from,
                "blacklisted_until": s.blacklisted_until,
            }
        return {
            "portal": self.portal,
            "last_time": (
                [self._last_time.day, self._last_time.sec] if self._last_time else None
            ),
            "ips": {ip: ip_state(s) for ip, s in sorted(self._ips.items())},
            "pub_credit": self._pub_dither.state(),
            "mon_credit": self._mon_dither.state(),
            "video_uploader": dict(self._video_uploader),
            "campaign_videos": sorted(self._campaign_videos),
            "first_ad_day": dict(self._first_ad_day),
            "delivered": {u: list(v) for u, v in self._delivered.items()},
            "mon_by_video_day": {
                v: {str(d): n for d, n in per.items()}
                for v, per in self._mon_by_video_day.items()
            },
            "suspend_effective": dict(self._suspend_effective),
            "suspended": sorted(self._suspended),
        }

    def restore(self, state: dict) -> None:
        self._ips = {}
        for ip, s in state["ips"].items():
            rep = IpReputationState(
                history=IpHistory(s["history"]),
                first_seen_day=s["first_seen_day"],
                suspicious_since=s["suspicious_since"],
                frozen_delay=s["frozen_delay"],
                frozen_history=(
                    IpHistory(s["frozen_history"]) if s["frozen_history"] else None
                ),
                first_hard_day=s["first_hard_day"],
                blacklist_from=s["blacklist_from"],
                blacklisted_until=s["blacklisted_until"],
            )
            self._ips[ip] = rep
        self._pub_dither.restore(state["pub_credit"])
        self._mon_dither.restore(state["mon_credit"])
        self._video_uploader = dict(state["video_uploader"])
        self._campaign_videos = set(state["campaign_videos"])
        self._first_ad_day = dict(state["first_ad_day"])
        self._delivered = {u: [tuple(x) for x in v] for u, v in state["delivered"].items()}
        self._mon_by_video_day = {
            v: {int(d): n for d, n in per.items()}
            for v, per in state["mon_by_video_day"].items()
        }
        self._suspend_effective = dict(state["suspend_effective"])
        self._suspended = set(state["suspended"])
        self._last_time = (
            SimTime(*state["last_time"]) if state["last_time"] else None
        )
        self._open_day = None


class _FractionPolicy(AuditPolicy):
    """Shared machinery for the rate-fraction portals (no reputation model)."""

    def __init__(self, params: Optional[PolicyParams] = None):
        super().__init__(params)
        self._pub_dither = QuotaDither(f"pub:{self.portal}")
        self._mon_dither = QuotaDither(f"mon:{self.portal}")
        self._today: dict[str, dict] = {}

    def _rate_fraction(self, daily_views: int) -> float:
        raise NotImplementedError

    def _monetized_pass(self) -> float:
        raise NotImplementedError

    def _discard_event(self, event: ViewEvent) -> bool:
        return False

    def ingest(self, event: ViewEvent) -> Verdict:
        self._check_order(event)
        ip_day = self._today.setdefault(
            event.source_ip,
            {"seen": {}, "passed": {}, "ads": {}, "mon": {}, "total": 0, "short": {}},
        )
        if self._discard_event(event):
            verdict = Verdict(False, event.ad_watched_fully, VerdictReason.REAL_USER_DISCOUNT)
        else:
            verdict = Verdict(True, event.ad_watched_fully, VerdictReason.PASS)
        ip_day["total"] += 1
        ip_day["seen"][event.video] = ip_day["seen"].get(event.video, 0) + 1
        if not verdict.count_public:
            ip_day["short"][event.video] = ip_day["short"].get(event.video, 0) + 1
        else:
            ip_day["passed"][event.video] = ip_day["passed"].get(event.video, 0) + 1
        if event.ad_watched_fully:
            ip_day["ads"][event.video] = ip_day["ads"].get(event.video, 0) + 1
            if verdict.count_monetized:
                ip_day["mon"][event.video] = ip_day["mon"].get(event.video, 0) + 1
        return verdict

    def end_of_day(self, day: int) -> list[Adjustment]:
        self._close_day_guard(day)
        adjustments: list[Adjustment] = []
        for ip, ip_day in sorted(self._today.items()):
            fraction = self._rate_fraction(ip_day["total"])
            for video, seen in sorted(ip_day["seen"].items()):
                countable = seen - ip_day["short"].get(video, 0)
                quota = self._pub_dither.take(f"{ip}|{video}", fraction * countable)
                quota = min(quota, countable)
                delta = ip_day["passed"].get(video, 0) - quota
                if delta > 0:
                    adjustments.append(
                        Adjustment(day, day, video, ip, "public", delta, "quota")
                    )
            for video, ads in sorted(ip_day["ads"].items()):
                quota = min(
                    ads, self._mon_dither.take(f"m:{ip}|{video}", self._monetized_pass() * ads)
                )
                delta = ip_day["mon"].get(video, 0) - quota
                if delta > 0:
                    adjustments.append(
                        Adjustment(day, day, video, ip, "monetized", delta, "quota")
                    )
        self._today = {}
        return adjustments

    def snapshot(self) -> dict:
        if self._open_day is not None:
            raise ValidationError("cannot snapshot mid-day")
        return {
            "portal": self.portal,
            "last_time": (
                [self._last_time.day, self._last_time.sec] if self._last_time else None
            ),
            "pub_credit": self._pub_dither.state(),
            "mon_credit": self._mon_dither.state(),
        }

    def restore(self, state: dict) -> None:
        self._pub_dither.restore(state["pub_credit"])
        self._mon_dither.restore(state["mon_credit"])
        self._last_time = SimTime(*state["last_time"]) if state["last_time"] else None
        self._open_day = None
        self._today = {}


class DailymotionLikePolicy(_FractionPolicy):
    """Rate-anchored public fractions, a flat monetized pass, and a
    minimum-duration rule that drops drive-by views."""

    portal = PORTAL_DAILYMOTION_LIKE

    def _discard_event(self, event: ViewEvent) -> bool:
        return event.duration_s < self.params.dailymotion_min_view_duration_s

    def _rate_fraction(self, daily_views: int) -> float:
        anchors = self.params.dailymotion_rate_anchors
        if daily_views <= anchors[0][0]:
            return anchors[0][1]
        if daily_views >= anchors[-1][0]:
            return anchors[-1][1]
        for (r0, p0), (r1, p1) in zip(anchors, anchors[1:]):
            if daily_views <= r1:
                return p0 + (p1 - p0) * (daily_views - r0) / (r1 - r0)
        return anchors[-1][1]

    def _monetized_pass(self) -> float:
        return self.params.dailymotion_monetized_pass


class PermissivePolicy(_FractionPolicy):
    """Counts nearly everything at any rate (Vimeo/Myvideo/TV-UOL shaped)."""

    portal = PORTAL_PERMISSIVE

    def _rate_fraction(self, daily_views: int) -> float:
        return self.params.permissive_pass

    def _monetized_pass(self) -> float:
        return self.params.permissive_pass


def make_policy(portal: str, params: Optional[PolicyParams] = None,
                overrides: Optional[dict] = None) -> AuditPolicy:
    """Instantiate a portal policy by label, with optional parameter overrides."""
    base = (params or PolicyParams()).with_overrides(overrides)
    if portal == PORTAL_YOUTUBE_LIKE:
        return YouTubeLikePolicy(base)
    if portal == PORTAL_DAILYMOTION_LIKE:
        return DailymotionLikePolicy(base)
    if portal == PORTAL_PERMISSIVE:
        return PermissivePolicy(base)
    raise ValidationError(f"unknown portal {portal!r}; expected one of {PORTALS}")


__all__ = [
    "PORTAL_YOUTUBE_LIKE",
    "PORTAL_DAILYMOTION_LIKE",
    "PORTAL_PERMISSIVE",
    "PORTALS",
    "VerdictReason",
    "Verdict",
    "Adjustment",
    "PolicyParams",
    "decay_fraction",
    "multi_video_fraction",
    "nat_pass_fraction",
    "detection_delay",
    "monetized_fraction",
    "QuotaDither",
    "IpReputationState",
    "AuditPolicy",
    "YouTubeLikePolicy",
    "DailymotionLikePolicy",
    "PermissivePolicy",
    "make_policy",
]
