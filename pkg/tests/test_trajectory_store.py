import io

import numpy as np
import pytest

from scenario_miner.errors import (
    DatasetParseError,
    DatasetSchemaError,
    FrameContiguityError,
    FrameRangeError,
    UnknownVehicleError,
)
from scenario_miner.trajectory_store import (
    RecordingConfig,
    coexistence_window,
    parse_tracks_csv,
)

from conftest import make_traj

HEADER = (
    "frame,id,x,y,width,height,xVelocity,yVelocity,"
    "xAcceleration,yAcceleration,laneId"
)


def parse(text):
    return parse_tracks_csv(text, RecordingConfig(recording_id="r"))


def test_minimal_two_row_file():
    csv_text = (
        f"{HEADER}\n"
        "0,162,389.16,14.27,4.2,1.8,30.0,0.0,0.1,0.0,3\n"
        "1,162,390.36,14.27,4.2,1.8,30.0,0.0,0.1,0.0,3\n"
    )
    store = parse(csv_text)
    assert len(store) == 1
    traj = store.get(162)
    assert len(traj) == 2
    assert traj.frame_range == (0, 1)


def test_coordinates_preserved_exactly():
    csv_text = f"{HEADER}\n0,162,389.16,-14.27,4.2,1.8,30,0,0,0,3\n"
    traj = parse(csv_text).get(162)
    assert traj.x[0] == 389.16
    assert traj.y[0] == -14.27


def test_missing_column_names_it():
    bad = HEADER.replace(",laneId", "")
    with pytest.raises(DatasetSchemaError) as err:
        parse(f"{bad}\n")
    assert err.value.column == "laneId"


def test_non_numeric_cell_reports_row():
    csv_text = f"{HEADER}\n0,162,oops,1,4,2,30,0,0,0,3\n"
    with pytest.raises(DatasetParseError) as err:
        parse(csv_text)
    assert err.value.row_number == 2
    assert err.value.column == "x"


def test_frame_gap_names_vehicle():
    csv_text = (
        f"{HEADER}\n"
        "10,7,0,0,4,2,30,0,0,0,3\n"
        "12,7,1,0,4,2,30,0,0,0,3\n"
    )
    with pytest.raises(FrameContiguityError) as err:
        parse(csv_text)
    assert err.value.vehicle_id == 7


def test_extra_columns_ignored_and_row_count_conserved():
    csv_text = (
        f"{HEADER},extra\n"
        "0,1,0,0,4,2,30,0,0,0,3,junk\n"
        "1,1,1,0,4,2,30,0,0,0,3,junk\n"
        "0,2,5,0,4,2,30,0,0,0,4,junk\n"
    )
    store = parse(csv_text)
    assert store.total_samples == 3
    for vid in store.vehicle_ids():
        assert store.get(vid) is not None


def test_unknown_vehicle_raises():
    csv_text = f"{HEADER}\n0,162,0,0,4,2,30,0,0,0,3\n"
    store = parse(csv_text)
    with pytest.raises(UnknownVehicleError):
        store.get(7)


def test_binary_stream_accepted():
    csv_text = f"{HEADER}\n0,1,0,0,4,2,30,0,0,0,3\n"
    store = parse_tracks_csv(
        io.BytesIO(csv_text.encode()), RecordingConfig(recording_id="r")
    )
    assert len(store) == 1


def test_slice_identity_and_single_frame():
    traj = make_traj(1, 0, 100)
    full = traj.slice(0, 99)
    assert len(full) == 100
    assert full.frame_range == traj.frame_range
    one = traj.slice(10, 10)
    assert len(one) == 1
    assert one.first_frame == 10


def test_slice_out_of_range():
    traj = make_traj(1, 0, 100)
    with pytest.raises(FrameRangeError):
        traj.slice(50, 200)


def test_coexistence_window_cases():
    a = make_traj(1, 0, 100)
    b = make_traj(2, 50, 101)
    c = make_traj(3, 200, 31)
    assert coexistence_window(a, b) == (50, 99)
    assert coexistence_window(a, c) is None
    assert coexistence_window(a, a) == (0, 99)
    # symmetric in its arguments
    assert coexistence_window(b, a) == coexistence_window(a, b)


def test_travel_sign_from_median_velocity():
    forward = make_traj(1, 0, 50, v=30.0)
    assert forward.travel_sign == 1
    backward = make_traj(2, 0, 50, v=-30.0)
    assert backward.travel_sign == -1


def test_center_x_uses_half_width():
    traj = make_traj(1, 0, 10, x0=100.0, v=0.0001, width=4.0)
    assert np.allclose(traj.center_x[0], 102.0)


def test_rows_sorted_by_frame_even_if_shuffled():
    rows = [
        "2,1,2,0,4,2,30,0,0,0,3",
        "0,1,0,0,4,2,30,0,0,0,3",
        "1,1,1,0,4,2,30,0,0,0,3",
    ]
    store = parse(f"{HEADER}\n" + "\n".join(rows) + "\n")
    traj = store.get(1)
    assert list(traj.frames) == [0, 1, 2]
    assert list(traj.x) == [0.0, 1.0, 2.0]
