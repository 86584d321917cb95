from pathlib import Path

import pytest

from trajtalk import LandmarkSet, Trajectory

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def simple_traj() -> Trajectory:
    return Trajectory.from_records(
        [
            {"t": 0.0, "pos": [0.0, 0.0, 0.0], "vel": 0.02, "force": 1.0},
            {"t": 2.0, "pos": [0.1, 0.0, 0.0], "vel": 0.04, "force": 3.0},
            {"t": 4.0, "pos": [0.2, 0.0, 0.0], "vel": 0.02, "force": 1.0},
        ]
    )


@pytest.fixture
def body() -> LandmarkSet:
    return LandmarkSet.from_dict(
        {
            "left wrist": [0.40, 0.20, 0.75],
            "left elbow": [0.62, 0.25, 0.78],
            "left shoulder": [0.80, 0.30, 1.05],
            "right wrist": [0.40, -0.20, 0.75],
            "right elbow": [0.62, -0.25, 0.78],
            "right shoulder": [0.80, -0.30, 1.05],
            "mouth": [0.85, 0.00, 1.30],
        }
    )
