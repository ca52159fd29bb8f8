"""Camera model construction and projection round trips.

The forward rig has identity-like extrinsics (camera z maps to body x), so
projection math can be checked by hand: a body point (d, 0, 0) sits on the
optical axis and lands at the principal point with depth d.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from wheelplan.camera import CameraModel, default_camera, forward_camera
from wheelplan.errors import ContractViolation


def test_forward_camera_shape_and_fov():
    cam = forward_camera()
    assert (cam.width, cam.height) == (320, 224)
    assert cam.hfov == pytest.approx(math.radians(86.0))
    assert cam.max_range == pytest.approx(10.0)
    # fx consistent with hfov: tan(hfov/2) = (width/2)/fx
    assert math.tan(cam.hfov / 2) == pytest.approx((cam.width / 2) / cam.fx)


def test_default_camera_mount():
    cam = default_camera()
    # mounted 0.8 m up, 0.1 m forward, pitched down
    assert cam.translation[2] == pytest.approx(0.8)
    assert cam.translation[0] == pytest.approx(0.1)
    r = np.asarray(cam.rotation)
    assert np.allclose(r @ r.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)


@pytest.mark.parametrize("field,value", [
    ("fx", 0.0),
    ("fx", -5.0),
    ("cx", -1.0),
    ("cx", 320.0),
    ("cy", 224.0),
    ("hfov", 0.0),
    ("hfov", math.pi),
    ("max_range", 0.0),
])
def test_camera_invariants_rejected(field, value):
    kw = dict(fx=250.0, fy=250.0, cx=160.0, cy=112.0, width=320, height=224,
              hfov=1.5, max_range=10.0)
    kw[field] = value
    with pytest.raises(ContractViolation):
        CameraModel(**kw)


def test_project_body_axis_point(fwd_cam):
    # a point straight ahead projects to the principal point at its range
    us, vs, zs = fwd_cam.project_body_points(np.array([[3.0, 0.0, 0.0]]))
    assert us[0] == pytest.approx(fwd_cam.cx)
    assert vs[0] == pytest.approx(fwd_cam.cy)
    assert zs[0] == pytest.approx(3.0)


def test_project_left_point_lands_left_of_center(fwd_cam):
    # body +y is the robot's left; image u decreases to the left
    us, _, _ = fwd_cam.project_body_points(np.array([[3.0, 1.0, 0.0]]))
    assert us[0] < fwd_cam.cx


def test_project_behind_camera_flagged(fwd_cam):
    _, _, zs = fwd_cam.project_body_points(np.array([[-2.0, 0.0, 0.0]]))
    assert zs[0] <= 0.0
