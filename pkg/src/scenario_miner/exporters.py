"""Serialize a scenario match to OpenSCENARIO XML and CarMaker text.

Coordinates are written straight from the dataset columns; the image
frame's downward y axis is negated on export (flip_y) so the world frame
is right-handed.  Heading is 0 for +x travel and pi for -x travel, the
road being x-aligned.  Only the matched scenario window is exported.
"""
from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import ExportError
from .search import ScenarioMatch
from .trajectory_store import Trajectory, TrajectoryStore

#: OpenSCENARIO schema revision written to the document header.
XOSC_REV_MAJOR = "1"
XOSC_REV_MINOR = "1"


@dataclass(frozen=True)
class ExportConfig:
    flip_y: bool = True
    include_ego_in_text: bool = False
    precision: int = 2

    def __post_init__(self):
        if self.precision < 2:
            raise ValueError("precision must be >= 2")


def format_float(value: float, precision: int) -> str:
    """Fixed-point with trailing zeros stripped, keeping one fractional digit."""
    s = f"{value:.{precision}f}"
    whole, frac = s.split(".")
    frac = frac.rstrip("0") or "0"
    if whole == "-0" and frac == "0":
        whole = "0"
    return f"{whole}.{frac}"


def _window_indices(
    traj: Trajectory, window: tuple[int, int]
) -> tuple[int, int]:
    """Index range [i0, i1] of the trajectory's frames inside the window."""
    lo = max(window[0], traj.first_frame)
    hi = min(window[1], traj.last_frame)
    if lo > hi:
        raise ExportError(
            f"vehicle {traj.vehicle_id} absent from window {window}"
        )
    return traj.index_of(lo), traj.index_of(hi)


def _vehicle_polyline(
    parent: ET.Element,
    traj: Trajectory,
    window: tuple[int, int],
    frame_rate: float,
    config: ExportConfig,
) -> None:
    i0, i1 = _window_indices(traj, window)
    p = config.precision
    heading = 0.0 if traj.travel_sign > 0 else math.pi
    h = format_float(heading, p)
    zero = format_float(0.0, p)
    for i in range(i0, i1 + 1):
        t = (int(traj.frames[i]) - window[0]) / frame_rate
        y = float(traj.y[i])
        if config.flip_y:
            y = -y
        vertex = ET.SubElement(parent, "Vertex", time=format_float(t, p))
        position = ET.SubElement(vertex, "Position")
        ET.SubElement(
            position, "WorldPosition",
            x=format_float(float(traj.x[i]), p),
            y=format_float(y, p),
            z=zero, h=h, p=zero, r=zero,
        )


def to_openscenario(
    match: ScenarioMatch, store: TrajectoryStore, config: ExportConfig = ExportConfig()
) -> str:
    """One scenario document with a polyline trajectory per vehicle."""
    window = match.scenario_window
    if window[0] > window[1]:
        raise ExportError("empty scenario window")
    frame_rate = store.config.frame_rate

    vehicles = [("ego", store.get(match.ego_id))]
    vehicles += [
        (f"target_{tw.target_id}", store.get(tw.target_id))
        for tw in match.targets
    ]

    root = ET.Element(
        "OpenSCENARIO", revMajor=XOSC_REV_MAJOR, revMinor=XOSC_REV_MINOR
    )
    ET.SubElement(
        root, "FileHeader",
        revMajor=XOSC_REV_MAJOR, revMinor=XOSC_REV_MINOR,
        author="scenario-miner",
        description=(
            f"{match.recording_id} ego {match.ego_id} "
            f"frames {window[0]}-{window[1]}"
        ),
    )
    entities = ET.SubElement(root, "Entities")
    p = config.precision
    for name, traj in vehicles:
        obj = ET.SubElement(entities, "ScenarioObject", name=name)
        vehicle = ET.SubElement(
            obj, "Vehicle", name=f"vehicle_{traj.vehicle_id}",
            vehicleCategory="car",
        )
        bbox = ET.SubElement(vehicle, "BoundingBox")
        ET.SubElement(bbox, "Center", x=format_float(0.0, p),
                      y=format_float(0.0, p), z=format_float(0.0, p))
        ET.SubElement(
            bbox, "Dimensions",
            width=format_float(float(traj.height[0]), p),
            length=format_float(float(traj.width[0]), p),
            height=format_float(1.5, p),
        )

    storyboard = ET.SubElement(root, "Storyboard")
    init = ET.SubElement(storyboard, "Init")
    actions = ET.SubElement(init, "Actions")
    for name, traj in vehicles:
        private = ET.SubElement(actions, "Private", entityRef=name)
        private_action = ET.SubElement(private, "PrivateAction")
        routing = ET.SubElement(private_action, "RoutingAction")
        follow = ET.SubElement(routing, "FollowTrajectoryAction")
        trajectory = ET.SubElement(
            follow, "Trajectory", name=f"trajectory_{name}", closed="false"
        )
        shape = ET.SubElement(trajectory, "Shape")
        polyline = ET.SubElement(shape, "Polyline")
        _vehicle_polyline(polyline, traj, window, frame_rate, config)
        timing = ET.SubElement(follow, "TimeReference")
        ET.SubElement(
            timing, "Timing", domainAbsoluteRelative="relative",
            scale=format_float(1.0, p), offset=format_float(0.0, p),
        )
        mode = ET.SubElement(follow, "TrajectoryFollowingMode")
        mode.set("followingMode", "position")

    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def to_carmaker_text(
    match: ScenarioMatch, store: TrajectoryStore, config: ExportConfig = ExportConfig()
) -> str:
    """Column-oriented time/position rows for the non-ego vehicles.

    Header '#time, x_<id>, y_<id>, ...'; a vehicle absent at a frame
    leaves its cells empty.
    """
    if not match.targets:
        raise ExportError("no non-ego vehicles to export")
    window = match.scenario_window
    frame_rate = store.config.frame_rate
    p = config.precision

    trajs = []
    if config.include_ego_in_text:
        trajs.append(store.get(match.ego_id))
    trajs += [store.get(tw.target_id) for tw in match.targets]

    header = "#time, " + ", ".join(
        f"x_{t.vehicle_id}, y_{t.vehicle_id}" for t in trajs
    )
    lines = [header]
    for frame in range(window[0], window[1] + 1):
        cells = [format_float((frame - window[0]) / frame_rate, p)]
        for traj in trajs:
            if traj.first_frame <= frame <= traj.last_frame:
                i = traj.index_of(frame)
                y = float(traj.y[i])
                if config.flip_y:
                    y = -y
                cells.append(format_float(float(traj.x[i]), p))
                cells.append(format_float(y, p))
            else:
                cells.append("")
                cells.append("")
        lines.append(", ".join(cells))
    return "\n".join(lines) + "\n"


def emit_ego_path(
    match: ScenarioMatch, store: TrajectoryStore, config: ExportConfig = ExportConfig()
) -> str:
    """Plain time/x/y rows for the ego, for manual import as a user path."""
    window = match.scenario_window
    frame_rate = store.config.frame_rate
    p = config.precision
    traj = store.get(match.ego_id)
    i0, i1 = _window_indices(traj, window)
    lines = [
        "# ego path for manual import; columns: time, x, y",
    ]
    for i in range(i0, i1 + 1):
        t = (int(traj.frames[i]) - window[0]) / frame_rate
        y = float(traj.y[i])
        if config.flip_y:
            y = -y
        lines.append(
            f"{format_float(t, p)}, {format_float(float(traj.x[i]), p)}, "
            f"{format_float(y, p)}"
        )
    return "\n".join(lines) + "\n"
