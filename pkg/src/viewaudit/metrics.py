"""Detection metrics: daily false-negative/positive ratios, medians across
days, aggregation across repeats, and recovery of the decay model by
least squares on the log-transformed post-threshold points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class MetricError(ValueError):
    """A metric is undefined for the given inputs."""


class FitError(ValueError):
    """The decay model cannot be fitted to the given points."""


def false_negative_rate(counted: int, generated: int) -> float:
    """Fraction of fake views counted as valid."""
    if generated <= 0:
        raise MetricError("false_negative_rate requires generated > 0")
    return counted / generated


def false_positive_rate(counted: int, real_generated: int) -> float:
    """Fraction of real-user views discounted as fake (clamped at 0)."""
    if real_generated <= 0:
        raise MetricError("false_positive_rate requires real_generated > 0")
    return max(0.0, 1.0 - counted / real_generated)


@dataclass(frozen=True)
class MetricSeries:
    """Per-day (generated, counted) pairs for one labeled experiment."""

    label: str
    days: tuple[int, ...]
    generated: tuple[int, ...]
    counted: tuple[int, ...]

    def __post_init__(self) -> None:
        if not (len(self.days) == len(self.generated) == len(self.counted)):
            raise MetricError("days, generated and counted must align")

    def ratios(self) -> list[float]:
        """Daily ratio for days with any generated views."""
        return [
            c / g for g, c in zip(self.generated, self.counted) if g > 0
        ]

    def median(self) -> float:
        return daily_median_rfn(self)

    def mean(self) -> float:
        ratios = self.ratios()
        if not ratios:
            raise MetricError("no days with generated views")
        return sum(ratios) / len(ratios)

    def total_ratio(self) -> float:
        g = sum(self.generated)
        if g == 0:
            raise MetricError("no generated views")
        return sum(self.counted) / g


def daily_median_rfn(series: MetricSeries) -> float:
    """Median of the per-day ratios; an even day count averages the middle two.

    The median is what removes the count-generously-then-adjust transient of
    the first days from the reported rate."""
    ratios = sorted(series.ratios())
    n = len(ratios)
    if n == 0:
        raise MetricError("no days with generated views")
    mid = n // 2
    if n % 2 == 1:
        return ratios[mid]
    return 0.5 * (ratios[mid - 1] + ratios[mid])


def aggregate_repeats(series_list: Sequence[MetricSeries]) -> tuple[float, float, float]:
    """(average, min, max) of the per-series medians across repeats."""
    if not series_list:
        raise MetricError("aggregate_repeats requires at least one series")
    medians = [daily_median_rfn(s) for s in series_list]
    return (sum(medians) / len(medians), min(medians), max(medians))


@dataclass(frozen=True)
class FitResult:
    threshold_est: float
    rate_est: float
    r_squared: float | None


def fit_exponential_decay(points: Iterable[tuple[float, float]]) -> FitResult:
    """Recover (threshold, decay rate, R^2) from (rate, ratio) points.

    The threshold estimate is the largest rate whose observed ratio is still
    >= 0.99; the decay rate comes from least squares on log-transformed
    post-threshold points, excluding exact zeros (log undefined). R^2 is
    reported in the log domain and requires at least three fitted points."""
    pts = sorted(points)
    if len(pts) < 5:
        raise FitError("need at least 5 points spanning the knee")
    flat = [w for w, r in pts if r >= 0.99]
    decayed = [(w, r) for w, r in pts if r < 0.99]
    if not flat or not decayed:
        raise FitError("points must span both sides of the knee")
    threshold = max(flat)
    post = [(w, r) for w, r in decayed if w > threshold and r > 0.0]
    if len(post) < 2:
        raise FitError("not enough nonzero post-threshold points")
    xs = np.array([w - threshold for w, _ in post], dtype=float)
    ys = np.array([math.log(r) for _, r in post], dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    rate = -float(slope)
    r_squared: float | None = None
    if len(post) >= 3:
        pred = slope * xs + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(threshold_est=float(threshold), rate_est=rate, r_squared=r_squared)


METRICS_CSV_HEADER = "scenario,policy,label,seed,day,generated,counted,ratio"


def series_to_csv_rows(
    scenario: str, policy: str, seed: int, series: MetricSeries
) -> list[str]:
    """One row per day plus a trailing aggregate (median) row."""
    rows = []
    for day, g, c in zip(series.days, series.generated, series.counted):
        ratio = f"{c / g:.6f}" if g else ""
        rows.append(f"{scenario},{policy},{series.label},{seed},{day},{g},{c},{ratio}")
    try:
        med = daily_median_rfn(series)
        rows.append(
            f"{scenario},{policy},{series.label},{seed},median,"
            f"{sum(series.generated)},{sum(series.counted)},{med:.6f}"
        )
    except MetricError:
        pass
    return rows


__all__ = [
    "MetricError",
    "FitError",
    "MetricSeries",
    "FitResult",
    "false_negative_rate",
    "false_positive_rate",
    "daily_median_rfn",
    "aggregate_repeats",
    "fit_exponential_decay",
    "METRICS_CSV_HEADER",
    "series_to_csv_rows",
]
