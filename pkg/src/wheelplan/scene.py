"""Scene layer: image containers, point clouds, and seeded synthetic
RGB-D/semantic rendering by ray casting against a 2.5-D world description."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .camera import CameraModel
from .errors import ContractViolation, InvalidScene
from .geometry import Pose2D, points_in_convex_polygon

log = logging.getLogger(__name__)

# semantic codes, also the pixel values of semantic PGM files
CLASS_UNKNOWN = 0
CLASS_DRIVABLE = 1
CLASS_OBSTACLE = 2

FRAME_CAMERA = "camera"
FRAME_BODY = "pb"


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel z-depth in meters; 0 marks an invalid pixel."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ContractViolation("depth image must be 2-D")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ContractViolation("depth values must be finite and non-negative")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class SemanticImage:
    """Per-pixel class codes: 0 unknown, 1 drivable, 2 obstacle."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ContractViolation("semantic image must be 2-D")
        if arr.max(initial=0) > CLASS_OBSTACLE:
            raise ContractViolation("semantic codes must be in {0, 1, 2}")
        arr = arr.astype(np.uint8).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True)
class RgbRef:
    """Opaque reference to the matching color image; never interpreted."""

    path: str | None = None
    data: bytes | None = None


@dataclass(frozen=True)
class PointCloud:
    """Labeled points, either 3-D in the camera frame or 2-D in the projected body frame."""

    points: np.ndarray
    labels: np.ndarray
    frame: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        lab = np.asarray(self.labels, dtype=np.uint8)
        if self.frame == FRAME_CAMERA and (pts.ndim != 2 or pts.shape[1] != 3):
            raise ContractViolation("camera-frame cloud must be (N, 3)")
        if self.frame == FRAME_BODY and (pts.ndim != 2 or pts.shape[1] != 2):
            raise ContractViolation("body-frame cloud must be (N, 2)")
        if self.frame not in (FRAME_CAMERA, FRAME_BODY):
            raise ContractViolation(f"unknown frame {self.frame!r}")
        if len(lab) != len(pts):
            raise ContractViolation("labels and points length mismatch")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return len(self.points)


def backproject(depth: DepthImage, semantic: SemanticImage, cam: CameraModel) -> PointCloud:
    """Lift every valid depth pixel to a labeled camera-frame 3-D point.

    Pixels with depth 0 or depth beyond cam.max_range are skipped. Output
    order is row-major over the image, which keeps the pipeline deterministic.
    """
    if depth.shape != semantic.shape:
        raise ContractViolation("depth/semantic dimensions differ")
    if depth.shape != (cam.height, cam.width):
        raise ContractViolation("image dimensions do not match the camera")
    d = depth.data
    valid = (d > 0) & (d <= cam.max_range)
    vs, us = np.nonzero(valid)
    dv = d[vs, us]
    x = (us - cam.cx) * dv / cam.fx
    y = (vs - cam.cy) * dv / cam.fy
    pts = np.column_stack([x, y, dv])
    return PointCloud(pts, semantic.data[vs, us], FRAME_CAMERA)


def filter_outliers(pc: PointCloud, k: int = 8, std_mult: float = 1.0) -> PointCloud:
    """Statistical outlier removal (single pass).

    Drops points whose mean distance to their k nearest neighbors exceeds the
    global mean plus std_mult standard deviations. Returns the input unchanged
    (with a logged warning) when the cloud has k or fewer points.

    Reapplying the filter is a no-op on layouts whose surviving neighbor
    distances are congruent (lattices, rings, coincident points); on
    irregular clouds the recomputed threshold can trim further points, which
    is inherent to the statistical rule.
    """
    if k < 1:
        raise ContractViolation("k must be >= 1")
    n = len(pc)
    if n <= k:
        log.warning("outlier filter skipped: %d points <= k=%d", n, k)
        return pc
    tree = cKDTree(pc.points)
    dists, _ = tree.query(pc.points, k=k + 1)  # column 0 is the point itself
    mean_d = dists[:, 1:].mean(axis=1)
    mu = mean_d.mean()
    # relative slack so congruent layouts do not churn on float rounding
    thresh = mu + std_mult * mean_d.std() + 1e-12 * max(mu, 1.0)
    keep = mean_d <= thresh
    if keep.all():
        return pc
    return PointCloud(pc.points[keep], pc.labels[keep], pc.frame)


@dataclass(frozen=True)
class ObstacleSpec:
    """Vertical prism: an oriented box or a cylinder standing on the ground."""

    kind: str  # "box" | "cylinder"
    x: float
    y: float
    yaw: float = 0.0
    size_x: float = 0.5  # box extent / cylinder radius
    size_y: float = 0.5
    height: float = 1.5

    def __post_init__(self):
        if self.kind not in ("box", "cylinder"):
            raise ContractViolation(f"unknown obstacle kind {self.kind!r}")
        if self.size_x <= 0 or self.size_y <= 0 or self.height <= 0:
            raise ContractViolation("obstacle extents must be positive")

    def contains_xy(self, px: float, py: float) -> bool:
        dx, dy = px - self.x, py - self.y
        if self.kind == "cylinder":
            return dx * dx + dy * dy <= self.size_x * self.size_x
        c, s = math.cos(-self.yaw), math.sin(-self.yaw)
        lx = c * dx - s * dy
        ly = s * dx + c * dy
        return abs(lx) <= self.size_x / 2 and abs(ly) <= self.size_y / 2

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "x": self.x, "y": self.y, "yaw": self.yaw,
            "size_x": self.size_x, "size_y": self.size_y, "height": self.height,
        }


@dataclass(frozen=True)
class SceneSpec:
    """Seedable synthetic world: flat ground, prism obstacles, a drivable
    polygon, the camera body pose, and sensor noise parameters."""

    extent: tuple[float, float]  # world size (m), x in [0, ex], y in [0, ey]
    camera_pose: Pose2D
    obstacles: tuple[ObstacleSpec, ...] = ()
    drivable: tuple[tuple[float, float], ...] | None = None  # None -> whole extent
    depth_sigma: float = 0.0
    misclass_rate: float = 0.0

    def __post_init__(self):
        ex, ey = self.extent
        if ex <= 0 or ey <= 0:
            raise ContractViolation("scene extent must be positive")
        if not (0.0 <= self.misclass_rate <= 1.0):
            raise ContractViolation("misclass_rate must be in [0, 1]")
        if self.depth_sigma < 0:
            raise ContractViolation("depth_sigma must be >= 0")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.drivable is not None:
            object.__setattr__(self, "drivable", tuple(tuple(p) for p in self.drivable))

    def drivable_polygon(self) -> np.ndarray:
        if self.drivable is not None:
            return np.asarray(self.drivable, dtype=float)
        ex, ey = self.extent
        return np.array([[0.0, 0.0], [ex, 0.0], [ex, ey], [0.0, ey]])

    def to_dict(self) -> dict:
        return {
            "extent": list(self.extent),
            "camera_pose": [self.camera_pose.x, self.camera_pose.y, self.camera_pose.theta],
            "obstacles": [o.to_dict() for o in self.obstacles],
            "drivable": None if self.drivable is None else [list(p) for p in self.drivable],
            "depth_sigma": self.depth_sigma,
            "misclass_rate": self.misclass_rate,
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        return SceneSpec(
            extent=tuple(d["extent"]),
            camera_pose=Pose2D(*d["camera_pose"]),
            obstacles=tuple(ObstacleSpec(**o) for o in d.get("obstacles", [])),
            drivable=None if d.get("drivable") is None else tuple(tuple(p) for p in d["drivable"]),
            depth_sigma=float(d.get("depth_sigma", 0.0)),
            misclass_rate=float(d.get("misclass_rate", 0.0)),
        )


def _rot_z(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ray_box(o: np.ndarray, d: np.ndarray, obs: ObstacleSpec) -> np.ndarray:
    """Smallest positive ray parameter hitting the prism, inf when missed.

    o is the ray origin, d the (N, 3) direction array, both in world frame.
    """
    c, s = math.cos(-obs.yaw), math.sin(-obs.yaw)
    ox = c * (o[0] - obs.x) - s * (o[1] - obs.y)
    oy = s * (o[0] - obs.x) + c * (o[1] - obs.y)
    oz = o[2]
    dx = c * d[:, 0] - s * d[:, 1]
    dy = s * d[:, 0] + c * d[:, 1]
    dz = d[:, 2]
    hx, hy = obs.size_x / 2, obs.size_y / 2
    tmin = np.zeros(len(d))
    tmax = np.full(len(d), np.inf)
    for oo, dd, lo, hi in ((ox, dx, -hx, hx), (oy, dy, -hy, hy), (oz, dz, 0.0, obs.height)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - oo) / dd
            t2 = (hi - oo) / dd
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = dd == 0
        inside = (oo >= lo) & (oo <= hi)
        near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
        tmin = np.maximum(tmin, near)
        tmax = np.minimum(tmax, far)
    hit = (tmin <= tmax) & (tmax > 0)
    t = np.where(tmin > 0, tmin, tmax)  # origin inside -> exit face
    return np.where(hit & (t > 0), t, np.inf)


def _ray_cylinder(o: np.ndarray, d: np.ndarray, obs: ObstacleSpec) -> np.ndarray:
    ox, oy, oz = o[0] - obs.x, o[1] - obs.y, o[2]
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    r = obs.size_x
    a = dx * dx + dy * dy
    b = 2 * (ox * dx + oy * dy)
    cc = ox * ox + oy * oy - r * r
    disc = b * b - 4 * a * cc
    t = np.full(len(d), np.inf)
    ok = (disc >= 0) & (a > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    for sign in (-1.0, 1.0):
        with np.errstate(divide="ignore", invalid="ignore"):
            tc = (-b + sign * sq) / (2 * a)
        z = oz + tc * dz
        good = ok & (tc > 0) & (z >= 0) & (z <= obs.height)
        t = np.where(good & (tc < t), tc, t)
    # cap disc at the top
    with np.errstate(divide="ignore", invalid="ignore"):
        tcap = (obs.height - oz) / dz
    px = ox + tcap * dx
    py = oy + tcap * dy
    good = (dz != 0) & (tcap > 0) & (px * px + py * py <= r * r)
    t = np.where(good & (tcap < t), tcap, t)
    return t


def generate_scene(spec: SceneSpec, cam: CameraModel, seed: int):
    """Render depth, semantic and RGB images of the scene by ray casting,
    plus the noise-free ground-truth costmap built by the same perception
    pipeline the live system uses.

    Returns (DepthImage, SemanticImage, RgbRef, Costmap). Deterministic for a
    fixed (spec, cam, seed).
    """
    from .costmap import build_costmap, project_to_body  # local import, avoids cycle

    pose = spec.camera_pose
    r_bw = _rot_z(pose.theta)
    cam_origin = np.array([pose.x, pose.y, 0.0]) + r_bw @ cam.translation
    ex, ey = spec.extent
    if not (0 <= cam_origin[0] <= ex and 0 <= cam_origin[1] <= ey):
        raise InvalidScene("camera outside the scene extent")
    for obs in spec.obstacles:
        if obs.contains_xy(cam_origin[0], cam_origin[1]) and cam_origin[2] <= obs.height:
            raise InvalidScene("camera placed inside an obstacle")

    h, w = cam.height, cam.width
    us, vs = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    # unit z in the camera frame, so the ray parameter equals z-depth
    dirs_c = np.stack(
        [(us - cam.cx) / cam.fx, (vs - cam.cy) / cam.fy, np.ones_like(us)], axis=-1
    ).reshape(-1, 3)
    r_cw = r_bw @ cam.rotation
    dirs_w = dirs_c @ r_cw.T

    with np.errstate(divide="ignore", invalid="ignore"):
        t_ground = np.where(dirs_w[:, 2] < 0, -cam_origin[2] / dirs_w[:, 2], np.inf)
    best_t = t_ground
    material = np.where(np.isfinite(t_ground), -1, -2)  # -1 ground, -2 nothing
    for idx, obs in enumerate(spec.obstacles):
        t_obs = (_ray_box if obs.kind == "box" else _ray_cylinder)(cam_origin, dirs_w, obs)
        closer = t_obs < best_t
        best_t = np.where(closer, t_obs, best_t)
        material = np.where(closer, idx, material)

    depth = np.where(np.isfinite(best_t), best_t, 0.0)
    depth[depth > cam.max_range] = 0.0

    semantic = np.full(len(best_t), CLASS_UNKNOWN, dtype=np.uint8)
    semantic[material >= 0] = CLASS_OBSTACLE
    ground_idx = np.nonzero(material == -1)[0]
    if len(ground_idx):
        poly = spec.drivable_polygon()
        gp = cam_origin[None, :2] + t_ground[ground_idx, None] * dirs_w[ground_idx, :2]
        inside = points_in_convex_polygon(gp, poly)
        semantic[ground_idx[inside]] = CLASS_DRIVABLE

    depth = depth.reshape(h, w)
    semantic = semantic.reshape(h, w)

    clean_depth = DepthImage(depth)
    clean_semantic = SemanticImage(semantic)

    rng = np.random.default_rng(np.random.SeedSequence((int(seed) & 0xFFFFFFFF, 0x5CE)))
    noisy_depth = depth
    if spec.depth_sigma > 0:
        noise = rng.normal(0.0, spec.depth_sigma, size=depth.shape)
        noisy_depth = np.where(depth > 0, np.maximum(depth + noise, 0.05), 0.0)
    noisy_semantic = semantic
    if spec.misclass_rate > 0:
        flip = rng.random(semantic.shape) < spec.misclass_rate
        flipped = semantic.copy()
        flipped[flip & (semantic == CLASS_DRIVABLE)] = CLASS_OBSTACLE
        flipped[flip & (semantic == CLASS_OBSTACLE)] = CLASS_DRIVABLE
        noisy_semantic = flipped

    rgb = _render_rgb(depth, semantic, cam.max_range)

    gt_cloud = backproject(clean_depth, clean_semantic, cam)
    gt_costmap = build_costmap(project_to_body(gt_cloud, cam))

    return DepthImage(noisy_depth), SemanticImage(noisy_semantic), RgbRef(data=rgb), gt_costmap


_CLASS_COLORS = np.array(
    [[70, 70, 90], [110, 160, 90], [170, 90, 70]], dtype=float
)  # unknown, drivable, obstacle


def _render_rgb(depth: np.ndarray, semantic: np.ndarray, max_range: float) -> bytes:
    """Shaded class-colored image as binary PPM bytes (plumbing for I_R)."""
    shade = np.where(depth > 0, 1.0 - 0.6 * np.clip(depth / max_range, 0, 1), 0.35)
    img = (_CLASS_COLORS[semantic] * shade[..., None]).astype(np.uint8)
    h, w = depth.shape
    return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()
