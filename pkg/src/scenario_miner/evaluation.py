"""Compare extracted scenarios with ground-truth labels, and generate a
deterministic synthetic corpus for desk evaluation.

The real benchmark recording is licensed and cannot ship, so the corpus
generator emits kinematically smooth following / cut-in / cut-out
episodes (plus far-lane distractors) whose ground-truth windows are
known by construction.
"""
from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .search import ScenarioMatch

FRAME_RATE = 25.0
_DT = 1.0 / FRAME_RATE


@dataclass(frozen=True)
class GroundTruthLabel:
    scenario_category: str
    ego_id: int
    target_id: int
    frame_start: int
    frame_end: int

    def __post_init__(self):
        if self.frame_start > self.frame_end:
            raise ValueError("label interval must be non-empty")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")


Instance = tuple[int, int, int, int]  # (ego_id, target_id, frame_start, frame_end)


def match_instances(matches: Iterable[ScenarioMatch]) -> list[Instance]:
    """Expand matches into per-(ego, target) prediction instances."""
    out: list[Instance] = []
    for m in matches:
        for tw in m.targets:
            out.append((m.ego_id, tw.target_id, tw.frame_start, tw.frame_end))
    return out


def temporal_iou(a: tuple[int, int], b: tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0] + 1) + (b[1] - b[0] + 1) - inter
    return inter / union


def match_predictions(
    predicted: Sequence[Instance],
    truth: Sequence[GroundTruthLabel],
    mode: str = "instance_iou",
    iou_threshold: float = 0.5,
) -> ConfusionCounts:
    """Confusion counts between predictions and ground truth.

    instance_iou: greedy one-to-one matching (highest IoU first) among
    pairs sharing (ego_id, target_id) with temporal IoU >= threshold.
    frame_level: set comparison of per-frame (ego, target, frame) tuples.
    """
    if mode == "instance_iou":
        if not (0 < iou_threshold <= 1):
            raise ValueError("iou_threshold must be in (0, 1]")
        pairs = []
        for pi, p in enumerate(predicted):
            for ti, t in enumerate(truth):
                if (p[0], p[1]) != (t.ego_id, t.target_id):
                    continue
                iou = temporal_iou(
                    (p[2], p[3]), (t.frame_start, t.frame_end)
                )
                if iou >= iou_threshold:
                    pairs.append((iou, pi, ti))
        pairs.sort(key=lambda x: (-x[0], x[1], x[2]))
        used_p: set[int] = set()
        used_t: set[int] = set()
        tp = 0
        for _, pi, ti in pairs:
            if pi in used_p or ti in used_t:
                continue
            used_p.add(pi)
            used_t.add(ti)
            tp += 1
        return ConfusionCounts(
            tp=tp, fp=len(predicted) - tp, fn=len(truth) - tp
        )
    if mode == "frame_level":
        pred_frames = {
            (p[0], p[1], f)
            for p in predicted
            for f in range(p[2], p[3] + 1)
        }
        truth_frames = {
            (t.ego_id, t.target_id, f)
            for t in truth
            for f in range(t.frame_start, t.frame_end + 1)
        }
        tp = len(pred_frames & truth_frames)
        return ConfusionCounts(
            tp=tp,
            fp=len(pred_frames) - tp,
            fn=len(truth_frames) - tp,
        )
    raise ValueError(f"unknown mode: {mode!r}")


def classification_metrics(
    counts: ConfusionCounts,
) -> dict[str, Optional[float]]:
    """Accuracy, precision, recall and F1 from TP/FP/FN.

    With no true-negative count available, accuracy is defined as
    tp / (tp + fp + fn).  Metrics with a zero denominator are reported
    as None rather than raising.
    """
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    total = tp + fp + fn
    accuracy = tp / total if total > 0 else None
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = None
    return {
        "accuracy": accuracy,
        "precision": precision,
        "recall": recall,
        "f1": f1,
    }


# --- ground-truth label files ----------------------------------------

_LABEL_COLUMNS = ("category", "egoId", "targetId", "frameStart", "frameEnd")


def write_labels_csv(labels: Iterable[GroundTruthLabel]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(_LABEL_COLUMNS)
    for lab in labels:
        writer.writerow([
            lab.scenario_category, lab.ego_id, lab.target_id,
            lab.frame_start, lab.frame_end,
        ])
    return buf.getvalue()


def read_labels_csv(text: str) -> list[GroundTruthLabel]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for row in reader:
        out.append(GroundTruthLabel(
            scenario_category=row["category"],
            ego_id=int(row["egoId"]),
            target_id=int(row["targetId"]),
            frame_start=int(row["frameStart"]),
            frame_end=int(row["frameEnd"]),
        ))
    return out


# --- synthetic corpus -------------------------------------------------
#
# Layout: episodes occupy disjoint 500-frame bands separated by 100-frame
# gaps, in lanes 2-4, so only vehicles of the same episode can interact.
# Distractors live in lanes 7-8 (more than two lanes away from any
# episode vehicle) and span random frame bands.

_BAND = 500
_GAP = 100
_CROSS_OFFSET = 250          # lane-crossing frame within a band
_HALF_WINDOW_FRAMES = 50     # matches the 2 s default half window at 25 Hz

CATEGORIES = ("following", "cut-in", "cut-out")


def _lane_y(lane: int) -> float:
    return lane * 4.0 - 2.0


@dataclass
class _Vehicle:
    vehicle_id: int
    first_frame: int
    x0: float
    v0: float
    a: float
    lane_path: list[tuple[int, int]]  # (frame_count, lane_id) runs
    width: float = 4.5
    height: float = 2.0

    def rows(self) -> Iterable[list]:
        frame = self.first_frame
        # y ramps linearly across each lane switch over 50 frames
        lanes: list[int] = []
        for count, lane in self.lane_path:
            lanes.extend([lane] * count)
        n = len(lanes)
        ys = [_lane_y(lane) for lane in lanes]
        switch_points = [
            i for i in range(1, n) if lanes[i] != lanes[i - 1]
        ]
        y_series = list(ys)
        vy_series = [0.0] * n
        for sp in switch_points:
            lo = max(0, sp - 25)
            hi = min(n - 1, sp + 25)
            y_from = _lane_y(lanes[sp - 1])
            y_to = _lane_y(lanes[sp])
            span = hi - lo
            for k in range(lo, hi + 1):
                frac = (k - lo) / span
                y_series[k] = y_from + frac * (y_to - y_from)
                vy_series[k] = (y_to - y_from) / (span * _DT)
        for i in range(n):
            t = i * _DT
            x = self.x0 + self.v0 * t + 0.5 * self.a * t * t
            v = self.v0 + self.a * t
            yield [
                frame + i, self.vehicle_id,
                f"{x:.2f}", f"{y_series[i]:.2f}",
                f"{self.width:.2f}", f"{self.height:.2f}",
                f"{v:.2f}", f"{vy_series[i]:.2f}",
                f"{self.a:.2f}", "0.00",
                lanes[i],
            ]


def synthetic_corpus(
    seed: int,
    spec: dict[str, int],
    distractors: int = 20,
) -> tuple[str, list[GroundTruthLabel]]:
    """Deterministic recording CSV plus its exact ground-truth labels.

    `spec` maps category name ('following', 'cut-in', 'cut-out') to the
    number of episodes.  Same seed and spec give byte-identical output.
    """
    if not spec or all(v <= 0 for v in spec.values()):
        raise ValueError("corpus spec must request at least one episode")
    for category in spec:
        if category not in CATEGORIES:
            raise ValueError(f"unknown scenario category: {category!r}")

    rng = random.Random(seed)
    vehicles: list[_Vehicle] = []
    labels: list[GroundTruthLabel] = []
    next_id = 1
    band_index = 0

    episodes = [
        category
        for category in CATEGORIES
        for _ in range(spec.get(category, 0))
    ]
    for category in episodes:
        band_start = band_index * (_BAND + _GAP)
        band_index += 1
        ego_id, tgt_id = next_id, next_id + 1
        next_id += 2
        x_jitter = float(rng.randint(0, 40))
        cross = band_start + _CROSS_OFFSET
        if category == "following":
            v0 = 33.0 + rng.randint(0, 4)
            lane = rng.choice((2, 3))
            vehicles.append(_Vehicle(
                ego_id, band_start, 60.0 + x_jitter, v0, -0.5,
                [(_BAND, lane)],
            ))
            vehicles.append(_Vehicle(
                tgt_id, band_start, 90.0 + x_jitter, v0 - 1.0, -0.5,
                [(_BAND, lane)], width=4.2,
            ))
            labels.append(GroundTruthLabel(
                category, ego_id, tgt_id, band_start, band_start + _BAND - 1
            ))
        elif category == "cut-in":
            vehicles.append(_Vehicle(
                ego_id, band_start, 60.0 + x_jitter, 30.0, 0.0,
                [(_BAND, 3)],
            ))
            vehicles.append(_Vehicle(
                tgt_id, band_start, 95.0 + x_jitter, 26.0, 0.3,
                [(_CROSS_OFFSET, 2), (_BAND - _CROSS_OFFSET, 3)],
                width=4.2,
            ))
            labels.append(GroundTruthLabel(
                category, ego_id, tgt_id,
                cross - _HALF_WINDOW_FRAMES, cross + _HALF_WINDOW_FRAMES,
            ))
        else:  # cut-out
            vehicles.append(_Vehicle(
                ego_id, band_start, 60.0 + x_jitter, 30.0, 0.0,
                [(_BAND, 3)],
            ))
            vehicles.append(_Vehicle(
                tgt_id, band_start, 90.0 + x_jitter, 31.0, 0.3,
                [(_CROSS_OFFSET, 3), (_BAND - _CROSS_OFFSET, 4)],
                width=4.2,
            ))
            labels.append(GroundTruthLabel(
                category, ego_id, tgt_id,
                cross - _HALF_WINDOW_FRAMES, cross + _HALF_WINDOW_FRAMES,
            ))

    total_frames = max(band_index, 1) * (_BAND + _GAP)
    for _ in range(distractors):
        life = rng.randint(400, 800)
        first = rng.randint(0, max(0, total_frames - life))
        vehicles.append(_Vehicle(
            next_id, first, float(rng.randint(0, 200)),
            25.0 + rng.randint(0, 15), 0.0,
            [(life, rng.choice((7, 8)))],
        ))
        next_id += 1

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([
        "frame", "id", "x", "y", "width", "height",
        "xVelocity", "yVelocity", "xAcceleration", "yAcceleration", "laneId",
    ])
    for vehicle in vehicles:
        for row in vehicle.rows():
            writer.writerow(row)
    return buf.getvalue(), labels
