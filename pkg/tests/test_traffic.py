"""Traffic generator tests: schedules, splitting, NAT, real-user mixes."""

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viewaudit.model import (
    SECONDS_PER_DAY,
    BehaviorConfig,
    BehaviorKind,
    IpHistory,
    IpIdentity,
    NatGroup,
    SchedulingError,
)
from viewaudit.traffic import (
    CROWDSOURCING,
    SOCIAL_MEDIA,
    TrafficSpec,
    apply_nat,
    distribute_over_ips,
    gen_real_user_views,
    merge_streams,
    schedule_views,
)


def deterministic(w, videos=1):
    return BehaviorConfig(
        kind=BehaviorKind.DETERMINISTIC, views_per_day=w, videos_per_day=videos,
        view_duration_s=40,
    )


def one_ip(addr="10.0.0.1"):
    return (IpIdentity(addr),)


class TestScheduleViews:
    def test_deterministic_20_across_8_days(self):
        spec = TrafficSpec("d", deterministic(20), one_ip(), ("v",), days=8, seed=1)
        events = schedule_views(spec)
        assert len(events) == 160
        assert {e.duration_s for e in events} == {40}
        gaps = {
            events[i + 1].time.total_seconds() - events[i].time.total_seconds()
            for i in range(len(events) - 1)
        }
        assert gaps == {4320}  # 72 minutes, including across midnight

    def test_burst_consecutive(self):
        behavior = BehaviorConfig(kind=BehaviorKind.BURST, views_per_day=20, view_duration_s=40)
        spec = TrafficSpec("b", behavior, one_ip(), ("v",), days=1, seed=1)
        events = schedule_views(spec)
        assert len(events) == 20
        waits = {
            events[i + 1].time.total_seconds() - events[i].time.total_seconds()
            for i in range(len(events) - 1)
        }
        assert waits == {0}

    def test_zero_views(self):
        spec = TrafficSpec("z", deterministic(0), one_ip(), ("v",), days=5, seed=1)
        assert schedule_views(spec) == []

    def test_poisson_long_run_mean(self):
        # Oracle: direct count over 1000 seeded days.
        behavior = BehaviorConfig(
            kind=BehaviorKind.POISSON_WAIT, views_per_day=20, view_duration_s=40,
            poisson_wait=True,
        )
        spec = TrafficSpec("p", behavior, one_ip(), ("v",), days=1000, seed=42)
        mean = len(schedule_views(spec)) / 1000
        assert abs(mean - 20) <= 0.2  # within 1%

    def test_unschedulable_wait_rejected(self):
        behavior = BehaviorConfig(
            kind=BehaviorKind.DETERMINISTIC, views_per_day=20, view_duration_s=40,
            inter_view_wait_s=5000,
        )
        spec = TrafficSpec("x", behavior, one_ip(), ("v",), days=1, seed=1)
        with pytest.raises(SchedulingError):
            schedule_views(spec)

    def test_cookie_stable_when_enabled(self):
        behavior = BehaviorConfig(
            kind=BehaviorKind.COOKIES, views_per_day=5, view_duration_s=40,
            cookies_enabled=True,
        )
        spec = TrafficSpec("ck", behavior, one_ip(), ("v",), days=3, seed=1)
        cookies = {e.cookie_id for e in schedule_views(spec)}
        assert len(cookies) == 1 and cookies != {None}

    def test_multi_video_rotation(self):
        spec = TrafficSpec(
            "mv", deterministic(7, videos=3), one_ip(), ("a", "b", "c"), days=1, seed=1
        )
        counts = Counter(e.video for e in schedule_views(spec))
        assert sorted(counts.values(), reverse=True) == [3, 2, 2]

    @given(w=st.integers(0, 40), days=st.integers(1, 5))
    @settings(max_examples=30, deadline=None)
    def test_conservation_non_poisson(self, w, days):
        if 0 < w < 1:
            return
        spec = TrafficSpec("c", deterministic(max(w, 0)), one_ip(), ("v",), days=days, seed=3)
        assert len(schedule_views(spec)) == w * days

    def test_determinism_byte_identical(self):
        behavior = BehaviorConfig(
            kind=BehaviorKind.COMPLETE, views_per_day=20, view_duration_s=None,
            poisson_wait=True, randomize_http_attrs=True,
        )
        spec = TrafficSpec("c", behavior, one_ip(), ("v",), days=5, seed=77)
        first = "\n".join(e.to_line() for e in schedule_views(spec))
        second = "\n".join(e.to_line() for e in schedule_views(spec))
        assert first == second

    def test_ordering_nondecreasing(self):
        spec = TrafficSpec(
            "o", deterministic(10), tuple(IpIdentity(f"10.0.0.{i}") for i in (1, 2)),
            ("v",), days=3, seed=5,
        )
        events = schedule_views(spec)
        assert all(a.time <= b.time for a, b in zip(events, events[1:]))
        assert all(e.video and e.source_ip for e in events)


class TestDistributeOverIps:
    def test_30_over_10(self):
        pool = tuple(IpIdentity(f"10.0.1.{i}") for i in range(1, 11))
        spec = TrafficSpec("d", deterministic(30), pool, ("v",), days=2, seed=1)
        events = distribute_over_ips(spec)
        per_ip_day = Counter((e.source_ip, e.time.day) for e in events)
        assert set(per_ip_day.values()) == {3}

    def test_single_ip_degenerate(self):
        spec = TrafficSpec("d", deterministic(9), one_ip(), ("v",), days=2, seed=1)
        assert distribute_over_ips(spec) == schedule_views(spec)

    def test_7_over_3_round_robin(self):
        pool = tuple(IpIdentity(f"10.0.2.{i}") for i in (1, 2, 3))
        spec = TrafficSpec("d", deterministic(7), pool, ("v",), days=1, seed=1)
        counts = Counter(e.source_ip for e in distribute_over_ips(spec))
        assert sorted(counts.values(), reverse=True) == [3, 2, 2]


class TestApplyNat:
    def _probe(self, days=3):
        spec = TrafficSpec("n", deterministic(20), one_ip("10.9.9.9"), ("v",), days=days, seed=4)
        return schedule_views(spec)

    def test_probe_plus_background_counts(self):
        nat = NatGroup("g1", "203.0.113.50", background_users=50,
                       background_views_per_user_per_day=8.0)
        merged = apply_nat(self._probe(), nat, seed=9)
        by_day = Counter((e.time.day, e.is_real_user) for e in merged)
        for day in range(3):
            assert by_day[(day, False)] == 20
            assert by_day[(day, True)] == 400
        assert {e.source_ip for e in merged} == {"203.0.113.50"}

    def test_no_background_users(self):
        nat = NatGroup("g0", "203.0.113.51", background_users=0)
        probe = self._probe()
        merged = apply_nat(probe, nat, seed=9)
        assert len(merged) == len(probe)
        assert all(e.source_ip == "203.0.113.51" for e in merged)
        assert [e.time for e in merged] == [e.time for e in probe]

    def test_day_off_has_no_background(self):
        nat = NatGroup("g2", "203.0.113.52", background_users=30,
                       active_day_pattern="workweek")
        merged = apply_nat(self._probe(days=7), nat, seed=9)
        weekend = [e for e in merged if e.time.day in (5, 6) and e.is_real_user]
        assert weekend == []

    def test_probe_multiset_preserved(self):
        nat = NatGroup("g3", "203.0.113.53", background_users=25)
        probe = self._probe()
        merged = apply_nat(probe, nat, seed=9)
        original = Counter((e.time, e.video, e.duration_s) for e in probe)
        rewritten = Counter(
            (e.time, e.video, e.duration_s) for e in merged if not e.is_real_user
        )
        assert original == rewritten


class TestRealUsers:
    def test_social_spread(self):
        events = gen_real_user_views(330, SOCIAL_MEDIA, seed=1)
        assert len(events) == 330
        assert all(e.is_real_user for e in events)
        assert len({e.source_ip for e in events}) >= 100

    def test_empty(self):
        assert gen_real_user_views(0, SOCIAL_MEDIA, seed=1) == []

    def test_crowd_concentration(self):
        events = gen_real_user_views(599, CROWDSOURCING, seed=1)
        assert len(events) == 599
        by_ip = Counter(e.source_ip for e in events)
        assert len(by_ip) <= 60
        assert max(by_ip.values()) >= 9

    def test_crowd_rfp_near_ten_percent(self):
        # Oracle: run the reference policy over the stream and count.
        from viewaudit.audit import make_policy
        from viewaudit.model import IpHistory
        from viewaudit.traffic import real_user_ip_pool

        events = gen_real_user_views(599, CROWDSOURCING, seed=1)
        policy = make_policy("YouTubeLike")
        for identity in real_user_ip_pool(CROWDSOURCING):
            policy.register_ip(identity.address, identity.history)
        counted = 0
        adjusted = 0
        for day in range(8):
            for event in [e for e in events if e.time.day == day]:
                counted += policy.ingest(event).count_public
            for adj in policy.end_of_day(day):
                adjusted += adj.amount
        rfp = 1.0 - (counted - adjusted) / 599
        assert 0.05 <= rfp <= 0.12


def test_merge_streams_stable_order():
    spec_a = TrafficSpec("a", deterministic(5), one_ip("10.1.0.1"), ("va",), days=2, seed=1)
    spec_b = TrafficSpec("b", deterministic(5), one_ip("10.1.0.2"), ("vb",), days=2, seed=2)
    merged = merge_streams([schedule_views(spec_a), schedule_views(spec_b)])
    assert len(merged) == 20
    assert all(x.time <= y.time for x, y in zip(merged, merged[1:]))
