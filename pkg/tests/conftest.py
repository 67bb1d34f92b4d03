"""Shared fixtures: trajectory builders and benchmark description texts."""
import numpy as np
import pytest

from scenario_miner.trajectory_store import (
    RecordingConfig,
    Trajectory,
    TrajectoryStore,
)

FRAME_RATE = 25.0

FOLLOWING_TEXT = (
    "The ego vehicle follows the lane and decelerates. Target vehicle #1, "
    "which is in front of the ego vehicle in the same lane, also decelerates."
)
CUT_IN_TEXT = (
    "The ego vehicle maintains its lane and velocity. Initially, Target "
    "Vehicle #1 is driving in the left adjacent lane. It then accelerates "
    "and changes lanes to the right, eventually driving in front of the "
    "ego vehicle."
)
CUT_OUT_TEXT = (
    "The ego vehicle follows the lane and maintains its velocity. Target "
    "vehicle #1, initially driving in front of the ego vehicle in the same "
    "lane, accelerates and changes lanes to the right."
)

WORKED_EXAMPLE_BLOCK = """{
  Ego Vehicle: {Ego longitudinal activity: ['keep velocity'], Ego lateral activity: ['follow lane']},
  Target Vehicle:
  {
    Target start position: {'adjacent lane': ['left adjacent lane']},
    Target end position: {'same lane': ['front']},
    Target behavior: {target longitudinal activity: ['acceleration'],
      target lateral activity: ['lane change right']}
  }
}"""


def make_traj(
    vehicle_id,
    first_frame,
    n,
    x0=0.0,
    v=30.0,
    a=0.0,
    lane=3,
    lanes=None,
    y=10.0,
    width=4.0,
    height=2.0,
    y_accel=None,
    x_accel=None,
):
    """Constant-acceleration trajectory, optionally with a lane-id series."""
    frames = np.arange(first_frame, first_frame + n)
    t = (frames - first_frame) / FRAME_RATE
    x = x0 + v * t + 0.5 * a * t * t
    xv = v + a * t
    lane_arr = np.asarray(lanes) if lanes is not None else np.full(n, lane)
    xa = np.asarray(x_accel) if x_accel is not None else np.full(n, a)
    ya = np.asarray(y_accel) if y_accel is not None else np.zeros(n)
    return Trajectory(
        vehicle_id=vehicle_id,
        frames=frames,
        x=x,
        y=np.full(n, y),
        width=np.full(n, width),
        height=np.full(n, height),
        x_velocity=xv,
        y_velocity=np.zeros(n),
        x_acceleration=xa,
        y_acceleration=ya,
        lane_id=lane_arr,
    )


def make_store(*trajectories, frame_rate=FRAME_RATE, recording_id="test"):
    store = TrajectoryStore(
        config=RecordingConfig(frame_rate=frame_rate, recording_id=recording_id)
    )
    for traj in trajectories:
        store.add(traj)
    return store


@pytest.fixture
def cut_in_store():
    """One ego keeping lane/speed, one target cutting in from the left.

    The target's lane-change window is [150..250] (crossing at 200,
    half window 50 frames); the ego matches keep velocity + follow lane
    over its whole range, so the expected analysis window is [150..250].
    """
    ego = make_traj(1, 0, 400, x0=100.0, v=30.0, a=0.0, lane=3)
    lanes = np.concatenate([np.full(200, 2), np.full(200, 3)])
    tgt = make_traj(2, 0, 400, x0=130.0, v=26.0, a=0.3, lanes=lanes, width=3.7)
    return make_store(ego, tgt)
