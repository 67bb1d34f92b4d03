"""Segment trajectories into longitudinal and lateral activity intervals.

An *activity* is the minimal unit of a scenario's dynamics; the instant
one activity ends the next one begins, so per channel the segments tile
the trajectory's frame range and adjacent segments always differ in kind.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import AmbiguousLaneChangeError, InputError, UndecidableDirectionError
from .trajectory_store import Trajectory


class LongitudinalActivity(enum.Enum):
    KEEP_VELOCITY = "keep velocity"
    ACCELERATION = "acceleration"
    DECELERATION = "deceleration"


class LateralActivity(enum.Enum):
    FOLLOW_LANE = "follow lane"
    LANE_CHANGE_LEFT = "lane change left"
    LANE_CHANGE_RIGHT = "lane change right"


ActivityKind = Union[LongitudinalActivity, LateralActivity]


@dataclass(frozen=True)
class DetectionParams:
    """Thresholds controlling activity segmentation.

    a_lon_threshold: acceleration magnitude separating keep-velocity
        from acceleration/deceleration [m/s^2].
    min_activity_duration: longitudinal runs shorter than this are
        absorbed into a neighbor [s].
    lane_change_half_window: half-extent of a lane-change activity
        around the lane-crossing instant [s].
    """

    a_lon_threshold: float = 0.2
    min_activity_duration: float = 1.0
    lane_change_half_window: float = 2.0

    def __post_init__(self):
        if self.a_lon_threshold <= 0:
            raise ValueError("a_lon_threshold must be > 0")
        if self.min_activity_duration < 0:
            raise ValueError("min_activity_duration must be >= 0")
        if self.lane_change_half_window < 0:
            raise ValueError("lane_change_half_window must be >= 0")


@dataclass(frozen=True)
class ActivitySegment:
    kind: ActivityKind
    frame_start: int
    frame_end: int

    def __post_init__(self):
        if self.frame_start > self.frame_end:
            raise ValueError("frame_start must be <= frame_end")

    @property
    def length(self) -> int:
        return self.frame_end - self.frame_start + 1


def classify_longitudinal(a_lon: float, a_thr: float) -> LongitudinalActivity:
    """Deceleration below -a_thr, acceleration above +a_thr, else keep velocity."""
    if not math.isfinite(a_lon) or not math.isfinite(a_thr):
        raise InputError(f"non-finite input: a_lon={a_lon}, a_thr={a_thr}")
    if a_thr <= 0:
        raise ValueError("a_thr must be > 0")
    if a_lon < -a_thr:
        return LongitudinalActivity.DECELERATION
    if a_lon > a_thr:
        return LongitudinalActivity.ACCELERATION
    return LongitudinalActivity.KEEP_VELOCITY


def classify_lateral(delta_lane: int, v_lon: float) -> LateralActivity:
    """Lane-change direction from the lane-id step and the travel direction.

    Lane ids grow downward in the image frame, so a positive lane step
    means a move to the right only for vehicles travelling in +x.
    """
    if delta_lane == 0:
        return LateralActivity.FOLLOW_LANE
    if v_lon == 0:
        raise UndecidableDirectionError(
            "lane step with zero longitudinal speed"
        )
    if (delta_lane > 0) == (v_lon > 0):
        return LateralActivity.LANE_CHANGE_RIGHT
    return LateralActivity.LANE_CHANGE_LEFT


def _runs(codes: np.ndarray) -> list[tuple[int, int, int]]:
    """Run-length encode: list of (code, start_index, end_index)."""
    boundaries = np.flatnonzero(np.diff(codes)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries - 1, [len(codes) - 1]))
    return [(int(codes[s]), int(s), int(e)) for s, e in zip(starts, ends)]


def _absorb_short_runs(
    runs: list[tuple[int, int, int]], min_frames: float
) -> list[tuple[int, int, int]]:
    """Fold runs shorter than min_frames into their longer neighbor.

    The shortest offending run goes first (leftmost on ties); when its
    neighbors are equally long the preceding one wins.  Merging repeats
    until no multi-run sequence has a sub-threshold run.
    """
    runs = list(runs)
    while len(runs) > 1:
        lengths = [e - s + 1 for _, s, e in runs]
        short = [i for i, n in enumerate(lengths) if n < min_frames]
        if not short:
            break
        i = min(short, key=lambda j: lengths[j])
        if i == 0:
            j = 1
        elif i == len(runs) - 1:
            j = i - 1
        else:
            j = i - 1 if lengths[i - 1] >= lengths[i + 1] else i + 1
        code, s, e = runs[i]
        ncode, ns, ne = runs[j]
        runs[j] = (ncode, min(s, ns), max(e, ne))
        del runs[i]
        # absorbing may bring two same-code runs next to each other
        merged: list[tuple[int, int, int]] = []
        for run in runs:
            if merged and merged[-1][0] == run[0]:
                c, ms, _ = merged[-1]
                merged[-1] = (c, ms, run[2])
            else:
                merged.append(run)
        runs = merged
    return runs


_LON_BY_CODE = (
    LongitudinalActivity.KEEP_VELOCITY,
    LongitudinalActivity.ACCELERATION,
    LongitudinalActivity.DECELERATION,
)


def segment_longitudinal(
    traj: Trajectory, params: DetectionParams, frame_rate: float
) -> list[ActivitySegment]:
    """Frame-wise classification merged into maximal, noise-absorbed runs."""
    a = traj.x_acceleration
    if not np.all(np.isfinite(a)):
        raise InputError(
            f"non-finite acceleration for vehicle {traj.vehicle_id}"
        )
    thr = params.a_lon_threshold
    codes = np.zeros(len(a), dtype=np.int8)
    codes[a > thr] = 1
    codes[a < -thr] = 2
    runs = _runs(codes)
    min_frames = params.min_activity_duration * frame_rate
    runs = _absorb_short_runs(runs, min_frames)
    f0 = traj.first_frame
    return [
        ActivitySegment(_LON_BY_CODE[code], f0 + s, f0 + e)
        for code, s, e in runs
    ]


def segment_lateral(
    traj: Trajectory, params: DetectionParams, frame_rate: float
) -> list[ActivitySegment]:
    """Lane-crossing events widened into lane-change windows.

    Each frame whose lane id differs from the previous frame is a
    crossing; the lane-change activity spans a symmetric window around
    it, clipped to the trajectory.  Overlapping or touching windows of
    the same direction merge; opposite-direction crossings with
    overlapping windows are ambiguous and raise.
    """
    lanes = traj.lane_id
    f0, f1 = traj.frame_range
    w = int(params.lane_change_half_window * frame_rate)
    sign = traj.travel_sign

    crossing_idx = np.flatnonzero(np.diff(lanes)) + 1
    windows: list[tuple[LateralActivity, int, int]] = []
    prev = None  # (direction, crossing_frame, win_start, win_end)
    for i in crossing_idx:
        c = f0 + int(i)
        direction = classify_lateral(int(lanes[i] - lanes[i - 1]), sign)
        lo, hi = max(f0, c - w), min(f1, c + w)
        if prev is not None:
            pdir, pc, plo, phi = prev
            if lo <= phi and direction is not pdir:
                raise AmbiguousLaneChangeError([pc, c])
            if lo <= phi + 1 and direction is pdir:
                prev = (pdir, c, plo, max(phi, hi))
                continue
            windows.append((pdir, plo, phi))
        prev = (direction, c, lo, hi)
    if prev is not None:
        windows.append((prev[0], prev[2], prev[3]))

    segments: list[ActivitySegment] = []
    cursor = f0
    for direction, lo, hi in windows:
        if lo > cursor:
            segments.append(
                ActivitySegment(LateralActivity.FOLLOW_LANE, cursor, lo - 1)
            )
        segments.append(ActivitySegment(direction, lo, hi))
        cursor = hi + 1
    if cursor <= f1:
        segments.append(
            ActivitySegment(LateralActivity.FOLLOW_LANE, cursor, f1)
        )
    return segments
