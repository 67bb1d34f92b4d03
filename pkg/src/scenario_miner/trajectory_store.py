"""Parse and index trajectory recordings in the highD CSV schema.

A recording is a single CSV file holding every vehicle's time-indexed
kinematic samples.  The store groups rows by vehicle id into immutable
:class:`Trajectory` objects backed by numpy arrays, so per-vehicle and
per-frame access stay cheap even for multi-million-row recordings.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Iterator, Optional, TextIO, Union

import numpy as np

from .errors import (
    DatasetParseError,
    DatasetSchemaError,
    EmptyWindowError,
    FrameContiguityError,
    FrameRangeError,
    UnknownVehicleError,
)

#: Required CSV header names, exactly as they appear in highD track files.
REQUIRED_COLUMNS = (
    "frame",
    "id",
    "x",
    "y",
    "width",
    "height",
    "xVelocity",
    "yVelocity",
    "xAcceleration",
    "yAcceleration",
    "laneId",
)

#: Below this absolute speed the sign of xVelocity is treated as noise.
STANDSTILL_SPEED = 0.1


@dataclass(frozen=True)
class RecordingConfig:
    """Per-recording metadata that the CSV itself does not carry."""

    frame_rate: float = 25.0
    recording_id: str = "recording"

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")


@dataclass(frozen=True)
class TrackSample:
    """One vehicle state at one frame (image frame: y grows downward)."""

    frame: int
    x: float
    y: float
    width: float
    height: float
    x_velocity: float
    y_velocity: float
    x_acceleration: float
    y_acceleration: float
    lane_id: int


class Trajectory:
    """One vehicle's ordered, frame-contiguous samples.

    Column data is stored as numpy arrays; :class:`TrackSample` views are
    materialized on demand.
    """

    __slots__ = (
        "vehicle_id", "frames", "x", "y", "width", "height",
        "x_velocity", "y_velocity", "x_acceleration", "y_acceleration",
        "lane_id", "_travel_sign",
    )

    def __init__(self, vehicle_id: int, frames, x, y, width, height,
                 x_velocity, y_velocity, x_acceleration, y_acceleration,
                 lane_id):
        self.vehicle_id = int(vehicle_id)
        self.frames = np.asarray(frames, dtype=np.int64)
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.width = np.asarray(width, dtype=np.float64)
        self.height = np.asarray(height, dtype=np.float64)
        self.x_velocity = np.asarray(x_velocity, dtype=np.float64)
        self.y_velocity = np.asarray(y_velocity, dtype=np.float64)
        self.x_acceleration = np.asarray(x_acceleration, dtype=np.float64)
        self.y_acceleration = np.asarray(y_acceleration, dtype=np.float64)
        self.lane_id = np.asarray(lane_id, dtype=np.int64)
        if len(self.frames) == 0:
            raise ValueError("trajectory must be non-empty")
        steps = np.diff(self.frames)
        if np.any(steps != 1):
            bad = int(self.frames[int(np.argmax(steps != 1))])
            raise FrameContiguityError(
                self.vehicle_id, f"gap after frame {bad}"
            )
        self._travel_sign = None

    # --- basic access -------------------------------------------------

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def first_frame(self) -> int:
        return int(self.frames[0])

    @property
    def last_frame(self) -> int:
        return int(self.frames[-1])

    @property
    def frame_range(self) -> tuple[int, int]:
        return self.first_frame, self.last_frame

    @property
    def center_x(self) -> np.ndarray:
        """Bounding-box center along x; positions compare centers, not corners."""
        return self.x + self.width / 2.0

    @property
    def travel_sign(self) -> int:
        """+1 / -1 direction of travel, from the median xVelocity.

        A single per-trajectory sign avoids flapping near standstill;
        highway vehicles do not reverse.
        """
        if self._travel_sign is None:
            med = float(np.median(self.x_velocity))
            self._travel_sign = 1 if med >= 0 else -1
        return self._travel_sign

    def index_of(self, frame: int) -> int:
        """Array index of `frame`; O(1) thanks to unit-step frames."""
        i = frame - self.first_frame
        if i < 0 or i >= len(self.frames):
            raise FrameRangeError(
                f"frame {frame} outside [{self.first_frame}, {self.last_frame}] "
                f"for vehicle {self.vehicle_id}"
            )
        return i

    def sample(self, index: int) -> TrackSample:
        return TrackSample(
            frame=int(self.frames[index]),
            x=float(self.x[index]),
            y=float(self.y[index]),
            width=float(self.width[index]),
            height=float(self.height[index]),
            x_velocity=float(self.x_velocity[index]),
            y_velocity=float(self.y_velocity[index]),
            x_acceleration=float(self.x_acceleration[index]),
            y_acceleration=float(self.y_acceleration[index]),
            lane_id=int(self.lane_id[index]),
        )

    @property
    def samples(self) -> Iterator[TrackSample]:
        return (self.sample(i) for i in range(len(self)))

    def slice(self, frame_start: int, frame_end: int) -> "Trajectory":
        """Contiguous sub-trajectory, inclusive of both endpoints."""
        if frame_start > frame_end:
            raise FrameRangeError(
                f"frame_start {frame_start} > frame_end {frame_end}"
            )
        i0 = self.index_of(frame_start)
        i1 = self.index_of(frame_end)
        sl = np.s_[i0:i1 + 1]
        out = Trajectory(
            self.vehicle_id, self.frames[sl], self.x[sl], self.y[sl],
            self.width[sl], self.height[sl], self.x_velocity[sl],
            self.y_velocity[sl], self.x_acceleration[sl],
            self.y_acceleration[sl], self.lane_id[sl],
        )
        out._travel_sign = self._travel_sign
        return out


def coexistence_window(
    traj_a: Trajectory, traj_b: Trajectory
) -> Optional[tuple[int, int]]:
    """Intersection of the two frame ranges, or None when disjoint.

    Two vehicles can only interact while both are on camera.
    """
    lo = max(traj_a.first_frame, traj_b.first_frame)
    hi = min(traj_a.last_frame, traj_b.last_frame)
    if lo > hi:
        return None
    return lo, hi


@dataclass
class TrajectoryStore:
    """Immutable-after-construction index of one recording's trajectories."""

    config: RecordingConfig
    _trajectories: dict[int, Trajectory] = field(default_factory=dict)

    def add(self, traj: Trajectory) -> None:
        self._trajectories[traj.vehicle_id] = traj

    def get(self, vehicle_id: int) -> Trajectory:
        try:
            return self._trajectories[vehicle_id]
        except KeyError:
            raise UnknownVehicleError(vehicle_id) from None

    def vehicle_ids(self) -> list[int]:
        return sorted(self._trajectories)

    def __len__(self) -> int:
        return len(self._trajectories)

    def __contains__(self, vehicle_id: int) -> bool:
        return vehicle_id in self._trajectories

    @property
    def total_samples(self) -> int:
        return sum(len(t) for t in self._trajectories.values())

    @property
    def frame_range(self) -> Optional[tuple[int, int]]:
        if not self._trajectories:
            return None
        return (
            min(t.first_frame for t in self._trajectories.values()),
            max(t.last_frame for t in self._trajectories.values()),
        )


_INT_COLUMNS = {"frame", "id", "laneId"}


def parse_tracks_csv(
    stream: Union[BinaryIO, TextIO, str, bytes],
    config: RecordingConfig,
) -> TrajectoryStore:
    """Single-pass parse of a highD tracks CSV into a TrajectoryStore.

    Unknown extra columns are ignored.  Raises
    :class:`DatasetSchemaError` for a missing required column,
    :class:`DatasetParseError` for a non-numeric cell (with its row
    number) and :class:`FrameContiguityError` when one vehicle's frames
    are not a unit-step run.
    """
    text = _as_text_stream(stream)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetSchemaError(REQUIRED_COLUMNS[0]) from None
    header = [h.strip() for h in header]
    col = {name: i for i, name in enumerate(header)}
    for name in REQUIRED_COLUMNS:
        if name not in col:
            raise DatasetSchemaError(name)
    idx = [col[name] for name in REQUIRED_COLUMNS]

    # per-vehicle column accumulators, in REQUIRED_COLUMNS order
    buckets: dict[int, list[list[float]]] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        values = []
        for name, i in zip(REQUIRED_COLUMNS, idx):
            cell = row[i]
            try:
                values.append(
                    int(cell) if name in _INT_COLUMNS else float(cell)
                )
            except ValueError:
                raise DatasetParseError(row_number, name, cell) from None
        vid = values[1]
        bucket = buckets.get(vid)
        if bucket is None:
            bucket = buckets[vid] = [[] for _ in REQUIRED_COLUMNS]
        for acc, v in zip(bucket, values):
            acc.append(v)

    store = TrajectoryStore(config=config)
    for vid in sorted(buckets):
        b = buckets[vid]
        order = np.argsort(np.asarray(b[0], dtype=np.int64), kind="stable")
        cols = [np.asarray(c)[order] for c in b]
        store.add(Trajectory(
            vehicle_id=vid,
            frames=cols[0], x=cols[2], y=cols[3],
            width=cols[4], height=cols[5],
            x_velocity=cols[6], y_velocity=cols[7],
            x_acceleration=cols[8], y_acceleration=cols[9],
            lane_id=cols[10],
        ))
    return store


def _as_text_stream(stream) -> TextIO:
    if isinstance(stream, str):
        return io.StringIO(stream)
    if isinstance(stream, bytes):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, io.TextIOBase):
        return stream
    if hasattr(stream, "read"):
        probe = stream.read(0)
        if isinstance(probe, bytes):
            return io.TextIOWrapper(stream, encoding="utf-8")
        return stream
    raise TypeError(f"unsupported stream type: {type(stream)!r}")
