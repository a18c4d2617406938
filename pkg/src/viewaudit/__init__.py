"""viewaudit: a discrete-time view-traffic simulator and audit toolkit for
studying view-fraud detection in video portals."""

from .model import (
    SECONDS_PER_DAY,
    BehaviorConfig,
    BehaviorKind,
    CounterSnapshot,
    IpHistory,
    IpIdentity,
    NatGroup,
    OrderingError,
    SchedulingError,
    SimTime,
    ValidationError,
    ViewEvent,
    advance,
    prefix24_of,
)
from .audit import (
    Adjustment,
    AuditPolicy,
    PolicyParams,
    Verdict,
    VerdictReason,
    decay_fraction,
    detection_delay,
    make_policy,
    monetized_fraction,
    multi_video_fraction,
    nat_pass_fraction,
)
from .metrics import (
    FitError,
    FitResult,
    MetricError,
    MetricSeries,
    aggregate_repeats,
    daily_median_rfn,
    false_negative_rate,
    false_positive_rate,
    fit_exponential_decay,
)
from .traffic import (
    RealTrafficSpec,
    TrafficSpec,
    apply_nat,
    distribute_over_ips,
    gen_real_user_views,
    merge_streams,
    schedule_views,
)
from .engine import (
    Expectation,
    PolicyBinding,
    Scenario,
    run_scenario,
    verify_expectations,
)
from .catalog import catalog, scenario_by_name

__version__ = "0.1.0"
