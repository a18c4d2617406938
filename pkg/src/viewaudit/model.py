"""Core domain types: simulated clock, view events, behaviors, IPs, counters.

Everything here is an immutable value type. Time is simulated at integer-second
resolution with 86400-second days; there is no wall-clock coupling anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

SECONDS_PER_DAY = 86400

# Enumerated referrer labels a portal observes on a view.
REFERRER_FACEBOOK = "Facebook"
REFERRER_TWITTER = "Twitter"
REFERRER_PORTAL_SEARCH = "PortalSearch"
REFERRER_DIRECT = "DirectLink"
REFERRERS = (REFERRER_FACEBOOK, REFERRER_TWITTER, REFERRER_PORTAL_SEARCH, REFERRER_DIRECT)

DEFAULT_USER_AGENT = "linux-firefox"
USER_AGENTS = (
    "linux-firefox",
    "linux-chrome",
    "windows-chrome",
    "windows-edge",
    "mac-safari",
    "android-chrome",
)


class ValidationError(ValueError):
    """A domain value violates its invariants."""


class SchedulingError(ValueError):
    """Requested views cannot be scheduled within a day."""


class OrderingError(ValueError):
    """An event stream violated nondecreasing time order."""


# ---------------------------------------------------------------------------
# Simulated clock
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class SimTime:
    """A simulated instant: (day index, second of day).

    Ordering is lexicographic on (day, sec), which matches chronological order.
    """

    day: int
    sec: int

    def __post_init__(self) -> None:
        if self.day < 0:
            raise ValidationError(f"day must be >= 0, got {self.day}")
        if not 0 <= self.sec < SECONDS_PER_DAY:
            raise ValidationError(f"sec must be in [0, {SECONDS_PER_DAY}), got {self.sec}")

    def total_seconds(self) -> int:
        return self.day * SECONDS_PER_DAY + self.sec


def advance(time: SimTime, delta_s: int) -> SimTime:
    """Shift a SimTime forward by delta_s seconds, rolling over day boundaries."""
    if delta_s < 0:
        raise ValidationError(f"delta_s must be >= 0, got {delta_s}")
    total = time.total_seconds() + delta_s
    return SimTime(total // SECONDS_PER_DAY, total % SECONDS_PER_DAY)


# ---------------------------------------------------------------------------
# IP identities
# ---------------------------------------------------------------------------


class IpHistory(Enum):
    """What the audit system already knows about an IP when a run starts."""

    NEVER_SEEN = "never-seen"
    SEEN_CLEAN = "seen-clean"
    SEEN_MISBEHAVING = "seen-misbehaving"


def _parse_ipv4(address: str) -> tuple[int, int, int, int]:
    parts = address.split(".")
    if len(parts) != 4:
        raise ValidationError(f"not a dotted IPv4 address: {address!r}")
    octets = []
    for part in parts:
        if not part.isdigit():
            raise ValidationError(f"bad octet {part!r} in {address!r}")
        value = int(part)
        if value > 255:
            raise ValidationError(f"octet out of range in {address!r}")
        octets.append(value)
    return tuple(octets)  # type: ignore[return-value]


def prefix24_of(address: str) -> str:
    """Return the /24 prefix token of an IPv4 address, e.g. 10.1.2.3 -> 10.1.2/24."""
    a, b, c, _ = _parse_ipv4(address)
    return f"{a}.{b}.{c}/24"


def same_prefix(addr_a: str, addr_b: str, bits: int) -> bool:
    """True when two addresses agree on their first `bits` bits."""
    if not 0 <= bits <= 32:
        raise ValidationError(f"prefix length out of range: {bits}")
    ia = int.from_bytes(bytes(_parse_ipv4(addr_a)), "big")
    ib = int.from_bytes(bytes(_parse_ipv4(addr_b)), "big")
    if bits == 0:
        return True
    mask = ((1 << bits) - 1) << (32 - bits)
    return (ia & mask) == (ib & mask)


@dataclass(frozen=True)
class IpIdentity:
    """A synthetic source IP plus what the audit system knows of its past."""

    address: str
    history: IpHistory = IpHistory.NEVER_SEEN
    first_seen: Optional[SimTime] = None

    def __post_init__(self) -> None:
        _parse_ipv4(self.address)

    @property
    def prefix24(self) -> str:
        return prefix24_of(self.address)


# ---------------------------------------------------------------------------
# View events and serialization
# ---------------------------------------------------------------------------

_EVENT_KEYS = (
    "time.day",
    "time.sec",
    "ip",
    "video",
    "dur",
    "ua",
    "ref",
    "cookie",
    "nat",
    "real",
    "ad_req",
    "ad_full",
)


@dataclass(frozen=True)
class ViewEvent:
    """One simulated view request with every attribute a portal observes."""

    time: SimTime
    source_ip: str
    video: str
    duration_s: int
    user_agent: str = DEFAULT_USER_AGENT
    referrer: str = REFERRER_DIRECT
    cookie_id: Optional[str] = None
    nat_group: Optional[str] = None
    is_real_user: bool = False
    ad_requested: bool = False
    ad_watched_fully: bool = False

    def __post_init__(self) -> None:
        if self.duration_s < 0:
            raise ValidationError(f"duration_s must be >= 0, got {self.duration_s}")
        if self.ad_watched_fully and not self.ad_requested:
            raise ValidationError("ad_watched_fully requires ad_requested")

    def to_line(self) -> str:
        """Serialize to one tab-separated key=value line (fixed key order)."""
        values = (
            str(self.time.day),
            str(self.time.sec),
            self.source_ip,
            self.video,
            str(self.duration_s),
            self.user_agent,
            self.referrer,
            self.cookie_id or "",
            self.nat_group or "",
            "1" if self.is_real_user else "0",
            "1" if self.ad_requested else "0",
            "1" if self.ad_watched_fully else "0",
        )
        return "\t".join(f"{k}={v}" for k, v in zip(_EVENT_KEYS, values))

    @classmethod
    def from_line(cls, line: str) -> "ViewEvent":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != len(_EVENT_KEYS):
            raise ValidationError(f"expected {len(_EVENT_KEYS)} fields, got {len(fields)}")
        parsed = {}
        for expected_key, token in zip(_EVENT_KEYS, fields):
            key, _, value = token.partition("=")
            if key != expected_key:
                raise ValidationError(f"expected key {expected_key!r}, got {key!r}")
            parsed[key] = value
        return cls(
            time=SimTime(int(parsed["time.day"]), int(parsed["time.sec"])),
            source_ip=parsed["ip"],
            video=parsed["video"],
            duration_s=int(parsed["dur"]),
            user_agent=parsed["ua"],
            referrer=parsed["ref"],
            cookie_id=parsed["cookie"] or None,
            nat_group=parsed["nat"] or None,
            is_real_user=parsed["real"] == "1",
            ad_requested=parsed["ad_req"] == "1",
            ad_watched_fully=parsed["ad_full"] == "1",
        )


# ---------------------------------------------------------------------------
# Probe behaviors
# ---------------------------------------------------------------------------


class BehaviorKind(Enum):
    DETERMINISTIC = "deterministic"
    BURST = "burst"
    POISSON_WAIT = "poisson-wait"
    SHORT_VIEWS = "short-views"
    COOKIES = "cookies"
    COMPLETE = "complete"
    CONSERVATIVE = "conservative"
    AGGRESSIVE = "aggressive"
    REAL_USER = "real-user"


@dataclass(frozen=True)
class BehaviorConfig:
    """A probe behavior: daily schedule shape plus the HTTP attributes it sends.

    `view_duration_s` of None means durations are drawn exponentially with mean
    `video_duration_s`. `inter_view_wait_s` of None means a constant wait of
    day/views_per_day; `poisson_wait` replaces the constant wait with a Poisson
    arrival process of the same daily rate.
    """

    kind: BehaviorKind
    views_per_day: int
    videos_per_day: int = 1
    view_duration_s: Optional[int] = 40
    video_duration_s: int = 300
    inter_view_wait_s: Optional[int] = None
    poisson_wait: bool = False
    burst_gap_s: int = SECONDS_PER_DAY
    cookies_enabled: bool = False
    randomize_http_attrs: bool = False

    def __post_init__(self) -> None:
        if self.views_per_day < 0:
            raise ValidationError("views_per_day must be >= 0")
        if self.videos_per_day < 1:
            raise ValidationError("videos_per_day must be >= 1")
        if self.views_per_day and self.views_per_day < self.videos_per_day:
            raise ValidationError("views_per_day must be >= videos_per_day")
        if self.view_duration_s is not None and self.view_duration_s < 0:
            raise ValidationError("view_duration_s must be >= 0")
        if self.kind is BehaviorKind.SHORT_VIEWS and self.view_duration_s != 1:
            raise ValidationError("short-views behavior requires 1 s duration")
        if self.kind is BehaviorKind.BURST and self.inter_view_wait_s not in (None, 0):
            raise ValidationError("burst behavior requires zero wait within the burst")


# ---------------------------------------------------------------------------
# NAT groups
# ---------------------------------------------------------------------------

PATTERN_ALWAYS = "always"
PATTERN_WORKWEEK = "workweek"


@dataclass(frozen=True)
class NatGroup:
    """A NATed network: one public IP shared by probes and background users.

    `active_day_pattern` selects the days on which background users are active:
    "always", or "workweek" (five active days followed by two days off, repeating
    from day 0).
    """

    group_id: str
    public_ip: str
    background_users: int = 0
    background_views_per_user_per_day: float = 8.0
    active_day_pattern: str = PATTERN_ALWAYS

    def __post_init__(self) -> None:
        _parse_ipv4(self.public_ip)
        if self.background_users < 0:
            raise ValidationError("background_users must be >= 0")
        if self.background_views_per_user_per_day < 0:
            raise ValidationError("background rate must be >= 0")
        if self.active_day_pattern not in (PATTERN_ALWAYS, PATTERN_WORKWEEK):
            raise ValidationError(f"unknown day pattern {self.active_day_pattern!r}")

    def is_active_day(self, day: int) -> bool:
        if self.active_day_pattern == PATTERN_ALWAYS:
            return True
        return day % 7 < 5


# ---------------------------------------------------------------------------
# Per-day counters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CounterSnapshot:
    """Final per-(video, day) counter values after end-of-day adjustments."""

    video: str
    day: int
    public_counted: int
    monetized_counted: int
    generated_fake: int
    generated_real: int
    generated_ads: int = 0

    def __post_init__(self) -> None:
        if self.public_counted < 0 or self.monetized_counted < 0:
            raise ValidationError("counters must be >= 0")
        if self.generated_fake < 0 or self.generated_real < 0 or self.generated_ads < 0:
            raise ValidationError("generated counts must be >= 0")


__all__ = [
    "SECONDS_PER_DAY",
    "REFERRERS",
    "REFERRER_FACEBOOK",
    "REFERRER_TWITTER",
    "REFERRER_PORTAL_SEARCH",
    "REFERRER_DIRECT",
    "DEFAULT_USER_AGENT",
    "USER_AGENTS",
    "ValidationError",
    "SchedulingError",
    "OrderingError",
    "SimTime",
    "advance",
    "IpHistory",
    "IpIdentity",
    "prefix24_of",
    "same_prefix",
    "ViewEvent",
    "BehaviorKind",
    "BehaviorConfig",
    "NatGroup",
    "PATTERN_ALWAYS",
    "PATTERN_WORKWEEK",
    "CounterSnapshot",
]
