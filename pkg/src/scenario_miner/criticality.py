"""Surrogate-safety metric time series over a match's analysis window.

All longitudinal quantities are taken along the travel direction:
speeds are |xVelocity|, accelerations are xAcceleration times the travel
sign, and the gap is the bumper-to-bumper distance along x (center
distance minus the two half-lengths).  Frames where a metric has no
defined value carry None, never a sentinel number.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, InsufficientDataError
from .trajectory_store import Trajectory


class MetricKind(enum.Enum):
    DST = "DST"
    RLONG_A = "RLongA"
    PSD = "PSD"
    DHW = "DHW"
    LONG_J = "LongJ"
    LAT_J = "LatJ"
    TTC = "TTC"
    PTTC = "PTTC"
    TET = "TET"
    TIT = "TIT"
    THW = "THW"
    DELTA_V = "DeltaV"


SCALE_CATEGORY: dict[MetricKind, str] = {
    MetricKind.DST: "acceleration",
    MetricKind.RLONG_A: "acceleration",
    MetricKind.PSD: "distance",
    MetricKind.DHW: "distance",
    MetricKind.LONG_J: "jerk",
    MetricKind.LAT_J: "jerk",
    MetricKind.TTC: "time",
    MetricKind.PTTC: "time",
    MetricKind.TET: "time",
    MetricKind.TIT: "time",
    MetricKind.THW: "time",
    MetricKind.DELTA_V: "velocity",
}

#: Metrics whose aggregate is the minimum over defined frames (small =
#: critical); the rest aggregate by maximum, except TET/TIT whose
#: aggregate is the accumulated sum itself.
MIN_AGGREGATED = frozenset({
    MetricKind.TTC, MetricKind.PTTC, MetricKind.THW,
    MetricKind.DHW, MetricKind.PSD,
})
SUM_AGGREGATED = frozenset({MetricKind.TET, MetricKind.TIT})

_JERK_KINDS = frozenset({MetricKind.LONG_J, MetricKind.LAT_J})


def default_comparison(kind: MetricKind) -> str:
    """'le' where a small value signals criticality, else 'ge'."""
    return "le" if kind in MIN_AGGREGATED else "ge"


@dataclass(frozen=True)
class MetricParams:
    ttc_tau: float = 3.0            # TET/TIT exposure threshold [s]
    safety_time_ts: float = 1.0     # DST safety time [s]
    max_deceleration: float = 7.5   # PSD assumed braking capability [m/s^2]

    def __post_init__(self):
        if self.ttc_tau <= 0 or self.safety_time_ts <= 0 \
                or self.max_deceleration <= 0:
            raise ValueError("metric parameters must be positive")


@dataclass(frozen=True)
class CriticalityConfig:
    kind: MetricKind
    threshold: float
    comparison: Optional[str] = None  # 'le' | 'ge'; None = per-kind default

    @property
    def effective_comparison(self) -> str:
        if self.comparison is not None:
            if self.comparison not in ("le", "ge"):
                raise ValueError("comparison must be 'le' or 'ge'")
            return self.comparison
        return default_comparison(self.kind)


@dataclass(frozen=True)
class CriticalityReport:
    kind: MetricKind
    series: tuple[Optional[float], ...]
    aggregate: Optional[float]
    threshold: Optional[float] = None
    comparison: Optional[str] = None
    passes_threshold: bool = False


def apply_threshold(
    report: CriticalityReport, config: CriticalityConfig
) -> CriticalityReport:
    cmp = config.effective_comparison
    if report.aggregate is None:
        passes = False
    elif cmp == "le":
        passes = report.aggregate <= config.threshold
    else:
        passes = report.aggregate >= config.threshold
    return replace(
        report,
        threshold=config.threshold,
        comparison=cmp,
        passes_threshold=passes,
    )


def _aligned_arrays(ego: Trajectory, tgt: Trajectory):
    if ego.frame_range != tgt.frame_range:
        raise InputError(
            f"slices cover different frame intervals: {ego.frame_range} "
            f"vs {tgt.frame_range}"
        )
    if ego.travel_sign != tgt.travel_sign:
        raise InputError("ego and target travel in opposite directions")
    sign = ego.travel_sign
    gap = np.abs(tgt.center_x - ego.center_x) - (ego.width + tgt.width) / 2.0
    v_ego = np.abs(ego.x_velocity)
    v_tgt = np.abs(tgt.x_velocity)
    a_ego = ego.x_acceleration * sign
    a_tgt = tgt.x_acceleration * sign
    return gap, v_ego, v_tgt, a_ego, a_tgt


def _ttc_values(gap, v_ego, v_tgt) -> np.ndarray:
    """TTC per frame; NaN while not closing."""
    dv = v_ego - v_tgt
    with np.errstate(divide="ignore", invalid="ignore"):
        ttc = np.where(dv > 0, gap / dv, np.nan)
    return ttc


def _smallest_positive_root(c: float, b: float, a2: float) -> Optional[float]:
    """Smallest positive root of a2*t^2 + b*t + c = 0."""
    if abs(a2) < 1e-12:
        if b == 0:
            return None
        t = -c / b
        return t if t > 0 else None
    disc = b * b - 4 * a2 * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    roots = sorted(((-b - sq) / (2 * a2), (-b + sq) / (2 * a2)))
    for t in roots:
        if t > 0:
            return t
    return None


def _finite_difference(values: np.ndarray, frame_rate: float) -> np.ndarray:
    """Central differences, one-sided at the endpoints."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) * (frame_rate / 2.0)
    out[0] = (values[1] - values[0]) * frame_rate
    out[-1] = (values[-1] - values[-2]) * frame_rate
    return out


def compute_series(
    ego_slice: Trajectory,
    tgt_slice: Trajectory,
    kind: MetricKind,
    params: MetricParams = MetricParams(),
    frame_rate: float = 25.0,
) -> CriticalityReport:
    """Per-frame metric values plus the worst-frame (or summed) aggregate."""
    n = len(ego_slice)
    if kind in _JERK_KINDS and n < 3:
        raise InsufficientDataError(
            "jerk metrics need a window of at least 3 frames"
        )
    gap, v_ego, v_tgt, a_ego, a_tgt = _aligned_arrays(ego_slice, tgt_slice)
    dt = 1.0 / frame_rate
    values = np.full(n, np.nan)

    if kind is MetricKind.DHW:
        values = gap.copy()
    elif kind is MetricKind.THW:
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(v_ego > 0, gap / v_ego, np.nan)
    elif kind is MetricKind.TTC:
        values = _ttc_values(gap, v_ego, v_tgt)
    elif kind is MetricKind.PTTC:
        for i in range(n):
            root = _smallest_positive_root(
                float(gap[i]),
                float(v_tgt[i] - v_ego[i]),
                0.5 * float(a_tgt[i] - a_ego[i]),
            )
            values[i] = np.nan if root is None else root
    elif kind in (MetricKind.TET, MetricKind.TIT):
        ttc = _ttc_values(gap, v_ego, v_tgt)
        exposed = np.isfinite(ttc) & (ttc <= params.ttc_tau)
        if kind is MetricKind.TET:
            values = np.where(exposed, dt, np.nan)
        else:
            values = np.where(exposed, dt * (params.ttc_tau - ttc), np.nan)
    elif kind is MetricKind.DST:
        denom = 2.0 * (gap - params.safety_time_ts * v_tgt)
        dv = v_ego - v_tgt
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(denom > 0, dv * dv / denom, np.nan)
    elif kind is MetricKind.RLONG_A:
        dv = v_ego - v_tgt
        with np.errstate(divide="ignore", invalid="ignore"):
            raw = a_tgt - dv * dv / (2.0 * gap)
        values = np.where(gap > 0, np.maximum(0.0, -raw), np.nan)
    elif kind is MetricKind.PSD:
        stopping = v_ego * v_ego / (2.0 * params.max_deceleration)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(stopping > 0, gap / stopping, np.nan)
    elif kind is MetricKind.LONG_J:
        values = _finite_difference(ego_slice.x_acceleration, frame_rate)
    elif kind is MetricKind.LAT_J:
        values = _finite_difference(ego_slice.y_acceleration, frame_rate)
    elif kind is MetricKind.DELTA_V:
        values = np.abs(v_ego - v_tgt)
    else:  # pragma: no cover - closed enum
        raise ValueError(f"unknown metric kind: {kind}")

    defined = np.isfinite(values)
    if kind in SUM_AGGREGATED:
        aggregate = float(np.nansum(np.where(defined, values, 0.0)))
    elif not np.any(defined):
        aggregate = None
    elif kind in MIN_AGGREGATED:
        aggregate = float(np.nanmin(values[defined]))
    else:
        aggregate = float(np.nanmax(values[defined]))

    series = tuple(
        float(v) if math.isfinite(v) else None for v in values
    )
    return CriticalityReport(kind=kind, series=series, aggregate=aggregate)


@dataclass(frozen=True)
class ScoredMatch:
    """A scenario match plus one criticality report per target."""

    match: object  # ScenarioMatch; untyped to avoid an import cycle
    reports: tuple[CriticalityReport, ...]
    passes: bool


def filter_pool(
    matches: Sequence,
    store,
    config: CriticalityConfig,
    params: MetricParams = MetricParams(),
) -> tuple[list[ScoredMatch], list[ScoredMatch]]:
    """Split the pool by the threshold; a multi-target match passes only
    when every target's report passes.  Input order is preserved."""
    frame_rate = store.config.frame_rate
    selected: list[ScoredMatch] = []
    rejected: list[ScoredMatch] = []
    for match in matches:
        ego = store.get(match.ego_id)
        reports = []
        for tw in match.targets:
            tgt = store.get(tw.target_id)
            report = compute_series(
                ego.slice(tw.frame_start, tw.frame_end),
                tgt.slice(tw.frame_start, tw.frame_end),
                config.kind, params, frame_rate,
            )
            reports.append(apply_threshold(report, config))
        scored = ScoredMatch(
            match=match,
            reports=tuple(reports),
            passes=all(r.passes_threshold for r in reports),
        )
        (selected if scored.passes else rejected).append(scored)
    return selected, rejected
