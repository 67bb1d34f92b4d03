"""Find (ego, targets, window) tuples satisfying a scenario query.

Every vehicle is tried as candidate ego.  A candidate analysis window is
the intersection of a matching ego activity window, a matching target
activity window and the pair's coexistence window; it survives when the
target's relative position matches the start spec at the window start,
matches the end spec at (or shortly after) the window end, and the
window is long enough.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .activities import (
    ActivitySegment,
    DetectionParams,
    LateralActivity,
    LongitudinalActivity,
    segment_lateral,
    segment_longitudinal,
)
from .errors import AmbiguousLaneChangeError
from .positions import RelativePosition, classify_position
from .schema import ScenarioQuery, TargetSpec
from .trajectory_store import Trajectory, TrajectoryStore, coexistence_window


@dataclass(frozen=True)
class TargetWindow:
    target_id: int
    frame_start: int
    frame_end: int


@dataclass(frozen=True)
class ScenarioMatch:
    recording_id: str
    ego_id: int
    targets: tuple[TargetWindow, ...]
    scenario_window: tuple[int, int]


@dataclass(frozen=True)
class NearMiss:
    """A candidate whose activities matched but a later clause failed."""

    ego_id: int
    target_id: int
    window: tuple[int, int]
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class SearchParams:
    detection: DetectionParams = field(default_factory=DetectionParams)
    end_position_grace: float = 2.0
    min_window_duration: float = 1.0

    def __post_init__(self):
        if self.end_position_grace < 0:
            raise ValueError("end_position_grace must be >= 0")
        if self.min_window_duration < 0:
            raise ValueError("min_window_duration must be >= 0")


class _SegmentCache:
    """Lazy per-vehicle activity segmentation; un-segmentable vehicles
    (ambiguous lane crossings) are excluded from the search."""

    def __init__(self, store: TrajectoryStore, params: DetectionParams):
        self._store = store
        self._params = params
        self._frame_rate = store.config.frame_rate
        self._cache: dict[int, Optional[tuple[list, list]]] = {}

    def get(self, vehicle_id: int):
        if vehicle_id not in self._cache:
            traj = self._store.get(vehicle_id)
            try:
                self._cache[vehicle_id] = (
                    segment_longitudinal(traj, self._params, self._frame_rate),
                    segment_lateral(traj, self._params, self._frame_rate),
                )
            except AmbiguousLaneChangeError:
                self._cache[vehicle_id] = None
        return self._cache[vehicle_id]


def _kind_windows(
    lon_segs: list[ActivitySegment],
    lat_segs: list[ActivitySegment],
    lon_kind: LongitudinalActivity,
    lat_kind: LateralActivity,
) -> list[tuple[int, int]]:
    """Nonempty intersections of matching longitudinal x lateral segments."""
    windows = []
    for a in lon_segs:
        if a.kind is not lon_kind:
            continue
        for b in lat_segs:
            if b.kind is not lat_kind:
                continue
            lo = max(a.frame_start, b.frame_start)
            hi = min(a.frame_end, b.frame_end)
            if lo <= hi:
                windows.append((lo, hi))
    windows.sort()
    return windows


def _position_at(ego: Trajectory, tgt: Trajectory, frame: int) -> RelativePosition:
    ei = ego.index_of(frame)
    ti = tgt.index_of(frame)
    return classify_position(
        int(ego.lane_id[ei]), int(tgt.lane_id[ti]),
        float(ego.center_x[ei]), float(tgt.center_x[ti]),
        ego.travel_sign,
    )


def _end_position_holds(
    ego: Trajectory,
    tgt: Trajectory,
    t2: int,
    grace_frames: int,
    wanted: RelativePosition,
) -> bool:
    hi = min(t2 + grace_frames, ego.last_frame, tgt.last_frame)
    return any(
        _position_at(ego, tgt, f) is wanted for f in range(t2, hi + 1)
    )


@dataclass(frozen=True)
class _Candidate:
    target_id: int
    window: tuple[int, int]
    reasons: tuple[str, ...]  # empty = all clauses satisfied


def _target_candidates(
    ego: Trajectory,
    tgt: Trajectory,
    spec: TargetSpec,
    tgt_windows: list[tuple[int, int]],
    ego_window: tuple[int, int],
    grace_frames: int,
    min_frames: float,
) -> list[_Candidate]:
    coex = coexistence_window(ego, tgt)
    if coex is None:
        return []
    out = []
    for tw_lo, tw_hi in tgt_windows:
        lo = max(tw_lo, ego_window[0], coex[0])
        hi = min(tw_hi, ego_window[1], coex[1])
        if lo > hi:
            continue
        reasons = []
        if _position_at(ego, tgt, lo) is not spec.start_position.member:
            reasons.append("start-position")
        if not _end_position_holds(
            ego, tgt, hi, grace_frames, spec.end_position.member
        ):
            reasons.append("end-position")
        if hi - lo + 1 < min_frames:
            reasons.append("duration")
        out.append(_Candidate(tgt.vehicle_id, (lo, hi), tuple(reasons)))
    return out


def search_with_explanations(
    store: TrajectoryStore,
    query: ScenarioQuery,
    params: SearchParams = SearchParams(),
) -> tuple[list[ScenarioMatch], list[NearMiss]]:
    """Full search returning matches plus near-miss explanations."""
    frame_rate = store.config.frame_rate
    grace_frames = int(params.end_position_grace * frame_rate)
    min_frames = params.min_window_duration * frame_rate
    cache = _SegmentCache(store, params.detection)
    vehicle_ids = store.vehicle_ids()

    # target activity windows are ego-independent; compute once per (spec, vehicle)
    window_cache: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def spec_windows(spec_index: int, vehicle_id: int):
        key = (spec_index, vehicle_id)
        if key not in window_cache:
            segs = cache.get(vehicle_id)
            if segs is None:
                window_cache[key] = []
            else:
                spec = query.targets[spec_index]
                window_cache[key] = _kind_windows(
                    segs[0], segs[1], spec.longitudinal, spec.lateral
                )
        return window_cache[key]

    matches: set[ScenarioMatch] = set()
    near_misses: list[NearMiss] = []

    for ego_id in vehicle_ids:
        ego_segs = cache.get(ego_id)
        if ego_segs is None:
            continue
        ego = store.get(ego_id)
        ego_windows = _kind_windows(
            ego_segs[0], ego_segs[1], query.ego_longitudinal, query.ego_lateral
        )
        if not ego_windows:
            continue
        others = [v for v in vehicle_ids if v != ego_id]
        for ego_window in ego_windows:
            # per TargetSpec: all candidate (target, window) pairs
            per_spec: list[list[_Candidate]] = []
            for spec_index, spec in enumerate(query.targets):
                candidates = []
                for tid in others:
                    windows = spec_windows(spec_index, tid)
                    if not windows:
                        continue
                    candidates.extend(
                        _target_candidates(
                            ego, store.get(tid), spec, windows, ego_window,
                            grace_frames, min_frames,
                        )
                    )
                per_spec.append(candidates)

            for cand in itertools.chain.from_iterable(per_spec):
                if cand.reasons:
                    near_misses.append(NearMiss(
                        ego_id, cand.target_id, cand.window, cand.reasons
                    ))

            satisfying = [
                [c for c in candidates if not c.reasons]
                for candidates in per_spec
            ]
            if any(not s for s in satisfying):
                continue
            for combo in itertools.product(*satisfying):
                ids = [c.target_id for c in combo]
                if len(set(ids)) != len(ids):
                    continue
                windows = tuple(
                    TargetWindow(c.target_id, c.window[0], c.window[1])
                    for c in combo
                )
                matches.add(ScenarioMatch(
                    recording_id=store.config.recording_id,
                    ego_id=ego_id,
                    targets=windows,
                    scenario_window=(
                        min(w.frame_start for w in windows),
                        max(w.frame_end for w in windows),
                    ),
                ))

    ordered = sorted(
        matches,
        key=lambda m: (
            m.ego_id,
            min(w.frame_start for w in m.targets),
            tuple((w.target_id, w.frame_start, w.frame_end) for w in m.targets),
        ),
    )
    return ordered, near_misses


def find_matches(
    store: TrajectoryStore,
    query: ScenarioQuery,
    params: SearchParams = SearchParams(),
) -> list[ScenarioMatch]:
    """Deduplicated matches sorted by (ego_id, window start)."""
    return search_with_explanations(store, query, params)[0]


def disambiguate_report(
    store: TrajectoryStore,
    query: ScenarioQuery,
    candidates: Iterable[ScenarioMatch],
    params: SearchParams = SearchParams(),
) -> list[tuple[ScenarioMatch, tuple[str, ...]]]:
    """Re-check every clause of each candidate; empty reasons = accepted.

    Intended for UI display of why a near-miss was rejected.
    """
    frame_rate = store.config.frame_rate
    grace_frames = int(params.end_position_grace * frame_rate)
    min_frames = params.min_window_duration * frame_rate
    cache = _SegmentCache(store, params.detection)
    out = []
    for match in candidates:
        reasons: list[str] = []
        ego = store.get(match.ego_id)
        ego_segs = cache.get(match.ego_id)
        if ego_segs is None:
            reasons.append("ego activities ambiguous")
        if len(match.targets) != len(query.targets):
            reasons.append("target count mismatch")
        for spec, tw in zip(query.targets, match.targets):
            tgt = store.get(tw.target_id)
            window = (tw.frame_start, tw.frame_end)
            if ego_segs is not None and not _covered_by_kind(
                ego_segs[0], window, query.ego_longitudinal
            ):
                reasons.append("ego longitudinal mismatch")
            if ego_segs is not None and not _covered_by_kind(
                ego_segs[1], window, query.ego_lateral
            ):
                reasons.append("ego lateral mismatch")
            tgt_segs = cache.get(tw.target_id)
            if tgt_segs is None:
                reasons.append(f"target {tw.target_id} activities ambiguous")
                continue
            if not _covered_by_kind(tgt_segs[0], window, spec.longitudinal):
                reasons.append(f"target {tw.target_id} longitudinal mismatch")
            if not _covered_by_kind(tgt_segs[1], window, spec.lateral):
                reasons.append(f"target {tw.target_id} lateral mismatch")
            if _position_at(ego, tgt, tw.frame_start) is not spec.start_position.member:
                reasons.append(f"target {tw.target_id} start-position")
            if not _end_position_holds(
                ego, tgt, tw.frame_end, grace_frames, spec.end_position.member
            ):
                reasons.append(f"target {tw.target_id} end-position")
            if tw.frame_end - tw.frame_start + 1 < min_frames:
                reasons.append(f"target {tw.target_id} duration")
        out.append((match, tuple(reasons)))
    return out


def _covered_by_kind(
    segments: list[ActivitySegment], window: tuple[int, int], kind
) -> bool:
    """True when every frame of `window` lies in a segment of `kind`."""
    lo, hi = window
    covered = lo
    for seg in segments:
        if seg.kind is kind and seg.frame_start <= covered <= seg.frame_end:
            covered = seg.frame_end + 1
            if covered > hi:
                return True
    return covered > hi
