"""Self-supervised label generation: image-frame masks for planned paths and
goals, goal sampling, and the batch dataset builder with its JSONL manifest.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .camera import CameraModel, default_camera
from .costmap import Costmap, build_costmap, project_to_body
from .errors import ContractViolation, NoFreeSpace, NoPathFound, ParseError
from .geometry import Pose2D
from .planners import PlannerParams, plan, resample, snap_goal, write_path_csv
from .scene import ObstacleSpec, SceneSpec, backproject, filter_outliers, generate_scene
from .sceneio import save_depth, save_mask, save_semantic
from .util import __version__, largest_remainder, parallel_map

PATH_STROKE_PX = 2.0
GOAL_STROKE_PX = 4.0

MANIFEST_KEYS = (
    "rgb", "depth", "semantic", "goal_x", "goal_y", "goal_theta",
    "mask_goal", "mask_path", "path_csv", "planner", "split", "status",
)


@dataclass(frozen=True)
class BinaryMask:
    """Read-only boolean image."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data).astype(bool)
        if arr.ndim != 2:
            raise ContractViolation("mask must be 2-D")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def empty(self) -> bool:
        """True when nothing projected into the image (not an error state)."""
        return not bool(self.data.any())

    def as_float(self) -> np.ndarray:
        return self.data.astype(float)


def _draw_capsule(mask: np.ndarray, p0, p1, radius: float) -> None:
    """Set pixels within radius of segment p0-p1 (pixel coordinates)."""
    h, w = mask.shape
    u0, v0 = p0
    u1, v1 = p1
    x_lo = max(0, int(math.floor(min(u0, u1) - radius)))
    x_hi = min(w - 1, int(math.ceil(max(u0, u1) + radius)))
    y_lo = max(0, int(math.floor(min(v0, v1) - radius)))
    y_hi = min(h - 1, int(math.ceil(max(v0, v1) + radius)))
    if x_lo > x_hi or y_lo > y_hi:
        return
    xs = np.arange(x_lo, x_hi + 1, dtype=float)
    ys = np.arange(y_lo, y_hi + 1, dtype=float)
    gx, gy = np.meshgrid(xs, ys)
    du, dv = u1 - u0, v1 - v0
    len2 = du * du + dv * dv
    if len2 > 0:
        t = np.clip(((gx - u0) * du + (gy - v0) * dv) / len2, 0.0, 1.0)
    else:
        t = 0.0
    d2 = (gx - (u0 + t * du)) ** 2 + (gy - (v0 + t * dv)) ** 2
    mask[y_lo : y_hi + 1, x_lo : x_hi + 1] |= d2 <= radius * radius


def project_to_mask(path, cam: CameraModel, *, radius_px: float = PATH_STROKE_PX,
                    connect: bool = True) -> BinaryMask:
    """Rasterize ground-plane path nodes into an image-frame mask.

    Nodes are lifted to z=0 in the body frame and projected; consecutive
    visible nodes are joined by capsules of the given pixel radius. Nodes
    behind the camera are dropped (and break the polyline there).
    """
    pos = np.asarray(getattr(path, "positions", path), dtype=float).reshape(-1, 2)
    pts = np.column_stack([pos, np.zeros(len(pos))])
    us, vs, zs = cam.project_body_points(pts)
    ok = np.isfinite(us) & np.isfinite(vs) & (zs > 1e-9)
    mask = np.zeros((cam.height, cam.width), dtype=bool)
    for i in range(len(pos)):
        if ok[i]:
            _draw_capsule(mask, (us[i], vs[i]), (us[i], vs[i]), radius_px)
    if connect:
        for i in range(len(pos) - 1):
            if ok[i] and ok[i + 1]:
                _draw_capsule(mask, (us[i], vs[i]), (us[i + 1], vs[i + 1]), radius_px)
    return BinaryMask(mask)


def goal_mask(goal: Pose2D, cam: CameraModel, *, radius_px: float = GOAL_STROKE_PX) -> BinaryMask:
    """Disc mask at the projected goal position (empty when out of view)."""
    return project_to_mask(np.array([[goal.x, goal.y]]), cam, radius_px=radius_px, connect=False)


def reachable_mask(cmap: Costmap, start: Pose2D) -> np.ndarray:
    """Free cells 8-connected to the start's cell."""
    cell = cmap.cell_of(start.x, start.y)
    free = cmap.free_mask
    if cell is None or not free[cell[1], cell[0]]:
        raise NoFreeSpace("start does not lie on a Free cell")
    labels, _ = ndimage.label(free, structure=np.ones((3, 3), dtype=int))
    return labels == labels[cell[1], cell[0]]


def sample_goal(cmap: Costmap, rng: np.random.Generator, start: Pose2D, *,
                min_dist: float = 1.0, max_dist: float = math.inf,
                within: np.ndarray | None = None) -> Pose2D:
    """Draw a goal pose on a Free cell center in the distance band around
    start, with a uniform heading. Raises NoFreeSpace when no cell qualifies."""
    free = cmap.free_mask
    if within is not None:
        free = free & within
    jj, ii = np.nonzero(free)
    if len(jj) == 0:
        raise NoFreeSpace("no Free cells to sample a goal from")
    cx = cmap.origin.x + (ii + 0.5) * cmap.resolution
    cy = cmap.origin.y + (jj + 0.5) * cmap.resolution
    d = np.hypot(cx - start.x, cy - start.y)
    cand = np.nonzero((d >= min_dist) & (d <= max_dist))[0]
    if len(cand) == 0:
        raise NoFreeSpace("no Free cells inside the goal distance band")
    k = int(cand[int(rng.integers(len(cand)))])
    theta = float(rng.uniform(-math.pi, math.pi))
    return Pose2D(float(cx[k]), float(cy[k]), theta)


def perceived_costmap(depth, semantic, cam: CameraModel, *, single_hull: bool = False) -> Costmap:
    """The live perception pipeline: backproject, drop statistical outliers,
    project to the body frame, rasterize."""
    pc = filter_outliers(backproject(depth, semantic, cam))
    return build_costmap(project_to_body(pc, cam), single_hull=single_hull)


def random_scene_spec(rng: np.random.Generator, *, depth_sigma: float = 0.0,
                      misclass_rate: float = 0.0) -> SceneSpec:
    """A randomized flat world ahead of the robot: the robot stands at
    (1, 5) facing +x in a 12x10 m extent, with 3-8 prism obstacles."""
    obstacles = []
    n = int(rng.integers(3, 9))
    while len(obstacles) < n:
        x = float(rng.uniform(2.5, 10.5))
        y = float(rng.uniform(1.0, 9.0))
        if math.hypot(x - 1.0, y - 5.0) < 1.6:
            continue
        if rng.random() < 0.5:
            obstacles.append(ObstacleSpec(
                kind="box", x=x, y=y, yaw=float(rng.uniform(-math.pi, math.pi)),
                size_x=float(rng.uniform(0.3, 1.1)), size_y=float(rng.uniform(0.3, 1.1)),
                height=float(rng.uniform(0.8, 2.0)),
            ))
        else:
            obstacles.append(ObstacleSpec(
                kind="cylinder", x=x, y=y,
                size_x=float(rng.uniform(0.15, 0.5)), size_y=1.0,
                height=float(rng.uniform(0.8, 2.0)),
            ))
    return SceneSpec(
        extent=(12.0, 10.0),
        camera_pose=Pose2D(1.0, 5.0, 0.0),
        obstacles=tuple(obstacles),
        depth_sigma=depth_sigma,
        misclass_rate=misclass_rate,
    )


def write_manifest(path, provenance: dict, records: list[dict]) -> None:
    lines = [json.dumps({"kind": "provenance", **provenance}, sort_keys=True)]
    for rec in records:
        if tuple(sorted(rec)) != tuple(sorted(MANIFEST_KEYS)):
            raise ContractViolation(f"manifest record keys {sorted(rec)} do not match the schema")
        lines.append(json.dumps(rec, sort_keys=True))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_manifest(path) -> tuple[dict, list[dict]]:
    provenance: dict = {}
    records: list[dict] = []
    offset = 0
    with open(path, "rb") as f:
        raw = f.read()
    for lineno, line in enumerate(raw.split(b"\n")):
        text = line.decode("utf-8").strip()
        if text:
            try:
                obj = json.loads(text)
            except json.JSONDecodeError:
                raise ParseError(f"manifest line {lineno + 1} is not valid JSON", offset) from None
            if obj.get("kind") == "provenance":
                provenance = obj
            else:
                missing = [k for k in MANIFEST_KEYS if k not in obj]
                if missing:
                    raise ParseError(
                        f"manifest line {lineno + 1} missing keys: {', '.join(missing)}", offset
                    )
                records.append(obj)
        offset += len(line) + 1
    return provenance, records


def _scene_job(args) -> list[dict]:
    (out_dir, idx, seed, planner_name, goals_per_scene, depth_sigma, misclass_rate, cam) = args
    cam = cam or default_camera()
    scene_dir = os.path.join(out_dir, f"scene_{idx:05d}")
    os.makedirs(scene_dir, exist_ok=True)
    rel = lambda name: f"scene_{idx:05d}/{name}"

    rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFF, idx, 0xDA7A)))
    spec = random_scene_spec(rng, depth_sigma=depth_sigma, misclass_rate=misclass_rate)
    noise_seed = int(rng.integers(0, 2**31))
    depth, semantic, rgb, gt = generate_scene(spec, cam, seed=noise_seed)

    prov = [f"wheelplan {__version__} gen-dataset", f"seed {seed} scene {idx}"]
    save_depth(os.path.join(scene_dir, "depth.pgm"), depth, provenance=prov)
    save_semantic(os.path.join(scene_dir, "semantic.pgm"), semantic, provenance=prov)
    with open(os.path.join(scene_dir, "rgb.ppm"), "wb") as f:
        f.write(rgb.data)
    from .costmap import save_costmap

    save_costmap(os.path.join(scene_dir, "gt.costmap"), gt, provenance=prov)

    def blank() -> dict:
        return {
            "rgb": rel("rgb.ppm"),
            "depth": rel("depth.pgm"),
            "semantic": rel("semantic.pgm"),
            "goal_x": 0.0,
            "goal_y": 0.0,
            "goal_theta": 0.0,
            "mask_goal": "",
            "mask_path": "",
            "path_csv": "",
            "planner": planner_name,
            "split": "",
            "status": "ok",
        }

    cmap = perceived_costmap(depth, semantic, cam)
    try:
        start = snap_goal(cmap, Pose2D(0.0, 0.0, 0.0))
        within = reachable_mask(cmap, start)
    except NoFreeSpace:
        out = []
        for _ in range(goals_per_scene):
            record = blank()
            record["status"] = "no_free_space"
            out.append(record)
        return out

    out = []
    for g in range(goals_per_scene):
        record = blank()
        out.append(record)
        try:
            # keep sampled goals inside perception range so most legs are plannable
            goal = sample_goal(cmap, rng, start, min_dist=2.5, max_dist=9.0, within=within)
        except NoFreeSpace:
            record["status"] = "no_free_space"
            continue
        record["goal_x"] = goal.x
        record["goal_y"] = goal.y
        record["goal_theta"] = goal.theta

        params = PlannerParams(algorithm=planner_name, seed=int(rng.integers(0, 2**31)))
        try:
            planned = resample(plan(cmap, start, goal, params), goal)
        except NoPathFound:
            record["status"] = "no_path"
            continue

        m_path = project_to_mask(planned, cam)
        m_goal = goal_mask(goal, cam)
        save_mask(os.path.join(scene_dir, f"mask_path_{g:02d}.pgm"), m_path.data, provenance=prov)
        save_mask(os.path.join(scene_dir, f"mask_goal_{g:02d}.pgm"), m_goal.data, provenance=prov)
        write_path_csv(os.path.join(scene_dir, f"path_{g:02d}.csv"), planned, provenance=prov)
        record["mask_path"] = rel(f"mask_path_{g:02d}.pgm")
        record["mask_goal"] = rel(f"mask_goal_{g:02d}.pgm")
        record["path_csv"] = rel(f"path_{g:02d}.csv")
    return out


def generate_dataset(out_dir, n_scenes: int, seed: int, *, planner: str = "astar",
                     goals_per_scene: int = 1,
                     depth_sigma: float = 0.0, misclass_rate: float = 0.0,
                     cam: CameraModel | None = None,
                     splits: tuple[float, float, float] = (0.6, 0.2, 0.2)) -> dict:
    """Generate scenes, labels and the manifest under out_dir.

    Successful samples are split 60/20/20 into train/val/test at scene
    granularity (every sample of a scene lands in the same split; scene
    counts per split follow the ratios by largest remainder). Failed samples
    keep an empty split. Fully deterministic for a fixed seed, including
    across process-pool execution.
    """
    if n_scenes < 1:
        raise ContractViolation("n_scenes must be >= 1")
    if goals_per_scene < 1:
        raise ContractViolation("goals_per_scene must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(out_dir, i, seed, planner, goals_per_scene, depth_sigma, misclass_rate, cam)
            for i in range(n_scenes)]
    records = [r for batch in parallel_map(_scene_job, jobs) for r in batch]

    # every scene emits exactly goals_per_scene records, in scene order
    per_scene_ok: list[list[int]] = [[] for _ in range(n_scenes)]
    for k, r in enumerate(records):
        if r["status"] == "ok":
            per_scene_ok[k // goals_per_scene].append(k)
    n_ok = sum(len(ks) for ks in per_scene_ok)
    eligible = [s for s in range(n_scenes) if per_scene_ok[s]]
    split_rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFF, 0x5917)))
    order = [eligible[k] for k in split_rng.permutation(len(eligible))]
    n_train, n_val, n_test = largest_remainder(len(order), splits)
    counts = {"train": 0, "val": 0, "test": 0}
    for pos, scene in enumerate(order):
        if pos < n_train:
            name = "train"
        elif pos < n_train + n_val:
            name = "val"
        else:
            name = "test"
        for k in per_scene_ok[scene]:
            records[k]["split"] = name
            counts[name] += 1

    provenance = {
        "command": "gen-dataset",
        "tool": f"wheelplan {__version__}",
        "seed": seed,
        "scenes": n_scenes,
        "goals_per_scene": goals_per_scene,
        "planner": planner,
        "depth_sigma": depth_sigma,
        "misclass_rate": misclass_rate,
    }
    manifest_path = os.path.join(out_dir, "manifest.jsonl")
    write_manifest(manifest_path, provenance, records)
    return {
        "manifest": manifest_path,
        "scenes": n_scenes,
        "ok": n_ok,
        "failed": len(records) - n_ok,
        "train": counts["train"],
        "val": counts["val"],
        "test": counts["test"],
    }
