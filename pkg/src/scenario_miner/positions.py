"""Classify where a target vehicle sits relative to an ego vehicle.

Left/right are seen from the driver, so the lane-id difference maps to
opposite sides depending on the travel direction along x.  Vehicles more
than two lanes away (or exactly overlapping) are out of scope.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindowError, UndecidableDirectionError
from .trajectory_store import Trajectory, coexistence_window


class RelativePosition(enum.Enum):
    FRONT = "front"
    BEHIND = "behind"
    LEFT_ADJACENT = "left adjacent lane"
    RIGHT_ADJACENT = "right adjacent lane"
    NEXT_TO_LEFT_ADJACENT = "lane next to left adjacent lane"
    NEXT_TO_RIGHT_ADJACENT = "lane next to right adjacent lane"
    OUT_OF_SCOPE = "out of scope"


@dataclass(frozen=True)
class PositionSpan:
    position: RelativePosition
    frame_start: int
    frame_end: int


def classify_position(
    lane_ego: int,
    lane_tgt: int,
    x_center_ego: float,
    x_center_tgt: float,
    v_lon_ego: float,
) -> RelativePosition:
    """Position of the target w.r.t. the ego at one frame.

    delta_lane = lane_tgt - lane_ego, delta_x = target center minus ego
    center.  The same-lane front/behind split and the left/right side
    mapping both flip with the sign of the ego's longitudinal velocity.
    """
    if v_lon_ego == 0:
        raise UndecidableDirectionError("ego longitudinal speed is zero")
    delta_lane = lane_tgt - lane_ego
    if abs(delta_lane) > 2:
        return RelativePosition.OUT_OF_SCOPE
    delta_x = x_center_tgt - x_center_ego
    if v_lon_ego > 0:
        if delta_lane == 0:
            if delta_x > 0:
                return RelativePosition.FRONT
            if delta_x < 0:
                return RelativePosition.BEHIND
            return RelativePosition.OUT_OF_SCOPE
        return {
            -1: RelativePosition.LEFT_ADJACENT,
            1: RelativePosition.RIGHT_ADJACENT,
            -2: RelativePosition.NEXT_TO_LEFT_ADJACENT,
            2: RelativePosition.NEXT_TO_RIGHT_ADJACENT,
        }[delta_lane]
    if delta_lane == 0:
        if delta_x < 0:
            return RelativePosition.FRONT
        if delta_x > 0:
            return RelativePosition.BEHIND
        return RelativePosition.OUT_OF_SCOPE
    return {
        1: RelativePosition.LEFT_ADJACENT,
        -1: RelativePosition.RIGHT_ADJACENT,
        2: RelativePosition.NEXT_TO_LEFT_ADJACENT,
        -2: RelativePosition.NEXT_TO_RIGHT_ADJACENT,
    }[delta_lane]


def position_timeline(
    ego: Trajectory, tgt: Trajectory
) -> list[PositionSpan]:
    """Frame-wise positions merged into maximal runs over the coexistence window.

    The ego's per-trajectory travel sign stands in for its per-frame
    velocity so the classification cannot flap near standstill.
    """
    window = coexistence_window(ego, tgt)
    if window is None:
        raise EmptyWindowError(
            f"vehicles {ego.vehicle_id} and {tgt.vehicle_id} share no frames"
        )
    lo, hi = window
    sign = ego.travel_sign
    ei0 = ego.index_of(lo)
    ti0 = tgt.index_of(lo)
    n = hi - lo + 1
    positions = [
        classify_position(
            int(ego.lane_id[ei0 + k]),
            int(tgt.lane_id[ti0 + k]),
            float(ego.center_x[ei0 + k]),
            float(tgt.center_x[ti0 + k]),
            sign,
        )
        for k in range(n)
    ]
    spans: list[PositionSpan] = []
    run_start = 0
    for k in range(1, n + 1):
        if k == n or positions[k] is not positions[run_start]:
            spans.append(
                PositionSpan(positions[run_start], lo + run_start, lo + k - 1)
            )
            run_start = k
    return spans
