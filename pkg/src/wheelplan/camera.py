"""Pinhole camera model with a rigid camera-to-body transform.

Camera frame: x right, y down, z forward (optical convention).
Body frame: x forward, y left, z up, origin on the ground under the robot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

# Maps optical axes onto a level, forward-looking body mount:
# body x = cam z, body y = -cam x, body z = -cam y.
CAMERA_TO_BODY_ALIGNED = np.array(
    [[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]
)

WORKING_WIDTH = 320
WORKING_HEIGHT = 224


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class CameraModel:
    """Intrinsics plus the camera-to-body rigid transform.

    rotation/translation map camera-frame points into the body frame:
    q_body = rotation @ q_cam + translation.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    hfov: float  # radians
    max_range: float  # m
    rotation: np.ndarray = field(default_factory=lambda: CAMERA_TO_BODY_ALIGNED.copy())
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ContractViolation("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ContractViolation("principal point outside the image")
        if not (0.0 < self.hfov < math.pi):
            raise ContractViolation("horizontal fov must be in (0, pi)")
        if self.max_range <= 0:
            raise ContractViolation("max_range must be positive")
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-6):
            raise ContractViolation("extrinsic rotation is not orthonormal")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))
        for name in ("fx", "fy", "cx", "cy", "hfov", "max_range"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("width", "height"):
            object.__setattr__(self, name, int(getattr(self, name)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def backproject_pixel(self, u: float, v: float, depth: float) -> np.ndarray:
        """Camera-frame 3-D point for pixel (u, v) at z-depth `depth`."""
        return np.array(
            [(u - self.cx) * depth / self.fx, (v - self.cy) * depth / self.fy, depth]
        )

    def cam_to_body(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation.T + self.translation

    def body_to_cam(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return (pts - self.translation) @ self.rotation

    def project_body_points(self, pts: np.ndarray):
        """Project body-frame 3-D points to pixels.

        Returns (u, v, z_cam) float arrays; points with z_cam <= 0 are behind
        the camera and must be discarded by the caller.
        """
        cam = self.body_to_cam(np.asarray(pts, dtype=float))
        z = cam[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * cam[:, 0] / z + self.cx
            v = self.fy * cam[:, 1] / z + self.cy
        return u, v, z


def forward_camera(
    width: int = WORKING_WIDTH,
    height: int = WORKING_HEIGHT,
    hfov_deg: float = 86.0,
    max_range: float = 10.0,
) -> CameraModel:
    """Level, forward-looking camera at the body origin (aligned extrinsics)."""
    hfov = math.radians(hfov_deg)
    fx = (width / 2.0) / math.tan(hfov / 2.0)
    return CameraModel(
        fx=fx,
        fy=fx,
        cx=(width - 1) / 2.0,
        cy=(height - 1) / 2.0,
        width=width,
        height=height,
        hfov=hfov,
        max_range=max_range,
    )


def default_camera(
    width: int = WORKING_WIDTH,
    height: int = WORKING_HEIGHT,
    hfov_deg: float = 86.0,
    max_range: float = 10.0,
    mount_height: float = 0.8,
    mount_forward: float = 0.1,
    pitch_deg: float = 15.0,
) -> CameraModel:
    """Default rig: camera `mount_height` above ground, pitched down `pitch_deg`."""
    base = forward_camera(width, height, hfov_deg, max_range)
    rot = _rot_y(math.radians(pitch_deg)) @ CAMERA_TO_BODY_ALIGNED
    return CameraModel(
        fx=base.fx,
        fy=base.fy,
        cx=base.cx,
        cy=base.cy,
        width=width,
        height=height,
        hfov=base.hfov,
        max_range=max_range,
        rotation=rot,
        translation=np.array([mount_forward, 0.0, mount_height]),
    )
