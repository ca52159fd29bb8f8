from __future__ import annotations

import numpy as np
import pytest

from wheelplan.camera import default_camera, forward_camera
from wheelplan.costmap import FREE, OCCUPIED, UNKNOWN, Costmap
from wheelplan.geometry import Pose2D


@pytest.fixture
def cam():
    """Tilted rig camera at working resolution."""
    return default_camera()


@pytest.fixture
def fwd_cam():
    """Level, axis-aligned camera: simplest geometry for hand-checked math."""
    return forward_camera()


@pytest.fixture
def grid():
    """Factory for small costmaps from character art ('F', 'O', 'U')."""
    codes = {"F": FREE, "O": OCCUPIED, "U": UNKNOWN}

    def make(rows: list[str], resolution: float = 0.1, origin: Pose2D = Pose2D(0.0, 0.0, 0.0)) -> Costmap:
        cells = np.array([[codes[ch] for ch in row] for row in rows], dtype=np.uint8)
        return Costmap(cells, resolution, origin)

    return make
