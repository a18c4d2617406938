"""Property tests for the audit rule engine's stated invariants."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from viewaudit.audit import (
    PolicyParams,
    decay_fraction,
    make_policy,
    multi_video_fraction,
    nat_pass_fraction,
)
from viewaudit.model import IpHistory, SimTime, ViewEvent

P = PolicyParams()

rates = st.floats(min_value=0.0, max_value=80.0, allow_nan=False)


@given(rates, rates)
def test_decay_monotone_nonincreasing(w1, w2):
    lo, hi = sorted((w1, w2))
    assert decay_fraction(P, lo) >= decay_fraction(P, hi)


@given(st.floats(min_value=0.0, max_value=1e-6))
def test_decay_continuous_at_threshold(eps):
    t1 = P.single_video_threshold
    assert decay_fraction(P, t1) == 1.0
    assert decay_fraction(P, t1 + eps) >= 1.0 - 1e-5


@given(st.integers(3, 60))
def test_single_video_never_milder_than_multi(w):
    assert multi_video_fraction(P, w, 1) <= multi_video_fraction(P, w, 3) + 1e-12


@given(st.integers(1, 7), st.integers(0, 59), st.integers(0, 59))
def test_multi_fraction_nonincreasing_in_rate(d, a, b):
    w1, w2 = sorted((max(a, d), max(b, d)))
    assert multi_video_fraction(P, w1, d) >= multi_video_fraction(P, w2, d) - 1e-12


@given(
    st.integers(1, 200),
    st.floats(min_value=0.0, max_value=4000.0),
    st.floats(min_value=0.0, max_value=4000.0),
)
def test_nat_fraction_monotone_and_clamped(w, bg1, bg2):
    lo, hi = sorted((bg1, bg2))
    f_lo = nat_pass_fraction(P, w, lo)
    f_hi = nat_pass_fraction(P, w, hi)
    assert f_lo <= f_hi + 1e-12
    for f in (f_lo, f_hi):
        assert decay_fraction(P, w) - 1e-12 <= f <= 1.0


def _drive(policy, streams, days):
    """Ingest merged per-day events; returns verdicts keyed by event identity."""
    out = {}
    for day in range(days):
        day_events = sorted(
            (e for s in streams for e in s if e.time.day == day),
            key=lambda e: (e.time, e.source_ip, e.video),
        )
        for event in day_events:
            out[(event.time, event.source_ip, event.video)] = policy.ingest(event)
        policy.end_of_day(day)
    return out


def _daily_stream(ip, video, per_day, days, sec0=700):
    return [
        ViewEvent(SimTime(d, sec0 + i * (86400 // max(per_day, 1) - 1)), ip, video, 40)
        for d in range(days)
        for i in range(per_day)
    ]


@settings(max_examples=25, deadline=None)
@given(
    bits=st.integers(24, 30),
    block=st.integers(0, 200),
    w_bad=st.integers(9, 60),
    days=st.integers(3, 6),
)
def test_prefix_isolation(bits, block, w_bad, days):
    """Misbehavior on one address never changes verdicts for a neighbor
    sharing any /24../30 prefix."""
    span = 1 << (32 - bits)
    base = (10 << 24) | (77 << 16) | (block << 8)
    addr_a = ".".join(str((base + 1 >> s) & 0xFF) for s in (24, 16, 8, 0))
    addr_b_int = base + max(2, span - 2)
    addr_b = ".".join(str((addr_b_int >> s) & 0xFF) for s in (24, 16, 8, 0))
    assert addr_a != addr_b

    innocent = _daily_stream(addr_a, "va", 1, days)
    guilty = _daily_stream(addr_b, "vb", w_bad, days, sec0=900)

    together = make_policy("YouTubeLike")
    together.register_ip(addr_a, IpHistory.SEEN_CLEAN)
    together.register_ip(addr_b, IpHistory.SEEN_CLEAN)
    verdicts_together = _drive(together, [innocent, guilty], days)

    alone = make_policy("YouTubeLike")
    alone.register_ip(addr_a, IpHistory.SEEN_CLEAN)
    verdicts_alone = _drive(alone, [innocent], days)

    for key, verdict in verdicts_alone.items():
        assert verdicts_together[key] == verdict


@settings(max_examples=20, deadline=None)
@given(w=st.integers(30, 80), days=st.integers(4, 8))
def test_blacklist_containment_and_release(w, days):
    """While blacklisted, every view from the IP to every video is discounted;
    after the release lag without misbehavior, verdicts return to baseline."""
    ip = "10.55.0.3"
    bad = _daily_stream(ip, "hot", w, days)
    side = _daily_stream(ip, "side", 1, days + P.blacklist_release_lag + 3, sec0=860)
    policy = make_policy("YouTubeLike")
    policy.register_ip(ip, IpHistory.SEEN_CLEAN)
    total_days = days + P.blacklist_release_lag + 3
    verdicts = _drive(policy, [bad, side], total_days)

    blacklist_start = 1  # known IP: one grace day
    blacklist_end = (days - 1) + P.blacklist_release_lag
    for (time, _, video), verdict in verdicts.items():
        if blacklist_start <= time.day <= blacklist_end:
            assert not verdict.count_public, (time.day, video)
    released = [
        v for (t, _, video), v in verdicts.items()
        if t.day > blacklist_end and video == "side"
    ]
    assert released and all(v.count_public for v in released)


@settings(max_examples=15, deadline=None)
@given(w=st.integers(1, 40), days=st.integers(2, 5))
def test_ingest_deterministic(w, days):
    stream = _daily_stream("10.66.0.1", "v", w, days)
    a = make_policy("YouTubeLike")
    b = make_policy("YouTubeLike")
    a.register_ip("10.66.0.1", IpHistory.SEEN_CLEAN)
    b.register_ip("10.66.0.1", IpHistory.SEEN_CLEAN)
    assert _drive(a, [stream], days) == _drive(b, [stream], days)


@settings(max_examples=15, deadline=None)
@given(w=st.integers(1, 60), days=st.integers(2, 6))
def test_monetized_counts_at_least_public(w, days):
    """Without a suspension, per-video monetized >= public on every day."""
    ip = "10.67.0.1"
    stream = [
        ViewEvent(
            SimTime(d, 500 + i * (86400 // max(w, 1) - 1)), ip, "v", 40,
            ad_requested=True, ad_watched_fully=True,
        )
        for d in range(days)
        for i in range(w)
    ]
    policy = make_policy("YouTubeLike")
    policy.register_ip(ip, IpHistory.SEEN_CLEAN)
    pub = {}
    mon = {}
    for day in range(days):
        for event in [e for e in stream if e.time.day == day]:
            verdict = policy.ingest(event)
            pub[day] = pub.get(day, 0) + int(verdict.count_public)
            mon[day] = mon.get(day, 0) + int(verdict.count_monetized)
        for adj in policy.end_of_day(day):
            target = pub if adj.kind == "public" else mon
            target[adj.day] = target.get(adj.day, 0) - adj.amount
    for day in range(days):
        assert mon[day] >= pub[day], f"day {day}: mon {mon[day]} < pub {pub[day]}"
