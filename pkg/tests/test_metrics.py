"""Metric and model-fit tests."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from viewaudit.metrics import (
    FitError,
    MetricError,
    MetricSeries,
    aggregate_repeats,
    daily_median_rfn,
    false_negative_rate,
    false_positive_rate,
    fit_exponential_decay,
)


def series(ratios, denominator=100):
    days = tuple(range(len(ratios)))
    generated = tuple(denominator for _ in ratios)
    counted = tuple(int(round(r * denominator)) for r in ratios)
    return MetricSeries("s", days, generated, counted)


class TestRates:
    def test_false_negative_examples(self):
        assert false_negative_rate(7, 100) == pytest.approx(0.07)
        assert false_negative_rate(0, 50) == 0.0
        assert false_negative_rate(50, 50) == 1.0

    def test_false_negative_undefined(self):
        with pytest.raises(MetricError):
            false_negative_rate(1, 0)

    def test_false_positive_examples(self):
        assert false_positive_rate(322, 330) == pytest.approx(0.024, abs=0.001)
        assert false_positive_rate(515, 587) == pytest.approx(0.122, abs=0.001)
        assert false_positive_rate(10, 10) == 0.0

    def test_false_positive_clamped(self):
        assert false_positive_rate(12, 10) == 0.0

    def test_false_positive_undefined(self):
        with pytest.raises(MetricError):
            false_positive_rate(0, 0)

    @given(st.integers(0, 500), st.integers(1, 500), st.integers(1, 9))
    def test_scale_invariance(self, counted, generated, m):
        assert false_negative_rate(counted, generated) == pytest.approx(
            false_negative_rate(m * counted, m * generated)
        )
        assert false_positive_rate(counted, generated) == pytest.approx(
            false_positive_rate(m * counted, m * generated)
        )


class TestDailyMedian:
    def test_transient_removed(self):
        s = series([1.0, 0.9, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])
        assert daily_median_rfn(s) == pytest.approx(0.1)

    def test_singleton(self):
        assert daily_median_rfn(series([0.5])) == pytest.approx(0.5)

    def test_no_valid_days(self):
        empty = MetricSeries("e", (0, 1), (0, 0), (0, 0))
        with pytest.raises(MetricError):
            daily_median_rfn(empty)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12))
    def test_permutation_invariant(self, ratios):
        shuffled = list(reversed(ratios))
        assert daily_median_rfn(series(ratios)) == pytest.approx(
            daily_median_rfn(series(shuffled))
        )

    @given(
        st.lists(st.floats(0.0, 1.0), min_size=3, max_size=11),
        st.integers(0, 10),
        st.floats(0.0, 1.0),
    )
    def test_single_day_outlier_bounded(self, ratios, index, replacement):
        """Replacing one day's ratio moves the median at most one order
        statistic away from the original middle."""
        index %= len(ratios)
        original = sorted(int(round(r * 100)) / 100 for r in ratios)
        modified = list(ratios)
        modified[index] = replacement
        new_median = daily_median_rfn(series(modified))
        n = len(original)
        lo_idx = max(0, (n - 1) // 2 - 1)
        hi_idx = min(n - 1, n // 2 + 1)
        assert original[lo_idx] - 1e-9 <= new_median <= original[hi_idx] + 1e-9


class TestAggregateRepeats:
    def test_example(self):
        repeats = [series([r]) for r in (0.05, 0.07, 0.09)]
        assert aggregate_repeats(repeats) == pytest.approx((0.07, 0.05, 0.09))

    def test_single(self):
        avg, lo, hi = aggregate_repeats([series([0.4])])
        assert avg == lo == hi == pytest.approx(0.4)

    def test_empty_rejected(self):
        with pytest.raises(MetricError):
            aggregate_repeats([])


class TestFit:
    @staticmethod
    def model_points(k=0.455, threshold=8, max_w=30):
        return [
            (w, 1.0 if w <= threshold else math.exp(-k * (w - threshold)))
            for w in range(1, max_w + 1)
        ]

    def test_exact_model_points(self):
        fit = fit_exponential_decay(self.model_points())
        assert fit.threshold_est == 8
        assert fit.rate_est == pytest.approx(0.455, abs=0.005)
        assert fit.r_squared is not None and fit.r_squared >= 0.999

    def test_constant_series_rejected(self):
        with pytest.raises(FitError):
            fit_exponential_decay([(w, 1.0) for w in range(1, 12)])

    def test_zeros_beyond_knee_excluded(self):
        points = [(w, r) for w, r in self.model_points(max_w=25)]
        points += [(w, 0.0) for w in (30, 40, 50, 60)]
        fit = fit_exponential_decay(points)
        assert fit.rate_est == pytest.approx(0.455, abs=0.005)

    def test_all_post_threshold_zero_rejected(self):
        points = [(w, 1.0) for w in range(1, 9)] + [(w, 0.0) for w in (9, 10, 20)]
        with pytest.raises(FitError):
            fit_exponential_decay(points)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_exponential_decay([(8, 1.0), (9, 0.6)])

    @settings(max_examples=40)
    @given(
        k=st.floats(0.1, 1.0),
        threshold=st.integers(3, 10),
    )
    def test_exact_on_noiseless_models(self, k, threshold):
        points = [
            (w, 1.0 if w <= threshold else math.exp(-k * (w - threshold)))
            for w in range(1, threshold + 16)
        ]
        fit = fit_exponential_decay(points)
        assert fit.threshold_est == threshold
        assert fit.rate_est == pytest.approx(k, rel=1e-6)
        assert fit.r_squared is not None and fit.r_squared > 0.999999
