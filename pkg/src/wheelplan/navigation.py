"""Beyond-range navigation: intermediate goal extraction along a global
path, frame-constrained visibility, simulated sensing, and the closed-loop
point-robot simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .costmap import FREE, OCCUPIED, UNKNOWN, Costmap, costmap_distance
from .errors import ContractViolation, FrameGap, NoFreeSpace, NoPathFound
from .evaluation import turning_cost
from .geometry import Pose2D, densify_polyline, wrap_angle
from .planners import (
    PlannerParams,
    plan,
    plan_astar,
    plan_prm,
    resample,
    snap_goal,
    traverse_cells,
)

DEFAULT_MAX_RANGE = 10.0  # m
DEFAULT_HFOV = math.radians(86.0)
LOS_STEP = 0.045  # m, sampling pitch for line-of-sight tests
SENSE_HALF_CELLS = 100  # sensed window is (2*100+1)^2 cells, lattice-aligned
NEAR_SENSE_M = 0.25  # footprint clearance: cells this close are sensed at any bearing


@dataclass(frozen=True)
class WorldMap:
    """Ground-truth configuration-space occupancy (no Unknown cells)."""

    costmap: Costmap

    def __post_init__(self):
        if bool(np.any(self.costmap.cells == UNKNOWN)):
            raise ContractViolation("world maps must not contain Unknown cells")


@dataclass(frozen=True)
class WorldPath:
    """Densified global route: poses carry the outgoing tangent heading."""

    poses: tuple[Pose2D, ...]

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.poses) < 2:
            raise ContractViolation("world path needs at least start and goal")

    def __len__(self) -> int:
        return len(self.poses)


@dataclass(frozen=True)
class GoalArray:
    """Ordered intermediate goals; the final entry is the mission goal."""

    poses: tuple[Pose2D, ...]
    r: float = DEFAULT_MAX_RANGE

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if not self.poses:
            raise ContractViolation("goal array must not be empty")
        for a, b in zip(self.poses[:-1], self.poses[1:]):
            if a.distance_to(b) > self.r + 1e-9:
                raise ContractViolation("consecutive goals further apart than the sensor range")

    def __len__(self) -> int:
        return len(self.poses)

    def __iter__(self):
        return iter(self.poses)


def visible(world: WorldMap, observer: Pose2D, target: Pose2D, *,
            max_range: float = DEFAULT_MAX_RANGE, hfov: float = DEFAULT_HFOV,
            fov_only: bool = False) -> bool:
    """Frame-constraint check: the target must lie within sensing range and
    the horizontal field of view of the observer, with the straight sight
    line crossing no Occupied cell (a target standing on an Occupied cell is
    itself not visible). `fov_only` drops the occlusion clause and keeps just
    the range and bearing constraints."""
    dx = target.x - observer.x
    dy = target.y - observer.y
    if math.hypot(dx, dy) > max_range + 1e-9:
        return False
    if dx != 0.0 or dy != 0.0:
        bearing = math.atan2(dy, dx)
        if abs(wrap_angle(bearing - observer.theta)) > hfov / 2.0 + 1e-12:
            return False
    if fov_only:
        return True
    cmap = world.costmap
    grid = cmap.cells
    h, w = grid.shape
    for ix, iy in traverse_cells(cmap.origin, cmap.resolution, (observer.x, observer.y), (target.x, target.y)):
        if 0 <= ix < w and 0 <= iy < h and grid[iy, ix] == OCCUPIED:
            return False
    return True


def plan_global(world: WorldMap, start: Pose2D, goal: Pose2D, *,
                params: PlannerParams | None = None, spacing: float = 0.5) -> WorldPath:
    """Privileged global route on the true map, densified to the pose
    spacing with outgoing tangent headings (the last pose keeps the goal
    heading). PRM by default; A* is retried when the roadmap fails."""
    cmap = world.costmap
    snapped = snap_goal(cmap, goal)
    if params is None:
        params = PlannerParams(algorithm="prm", seed=0)
    try:
        gp = plan(cmap, start, snapped, params)
    except NoPathFound:
        gp = plan_astar(cmap, start, snapped)
    pts = densify_polyline(gp.waypoints, spacing)
    poses = []
    for k in range(len(pts) - 1):
        dx = pts[k + 1, 0] - pts[k, 0]
        dy = pts[k + 1, 1] - pts[k, 1]
        theta = math.atan2(dy, dx) if (dx or dy) else (poses[-1].theta if poses else start.theta)
        poses.append(Pose2D(pts[k, 0], pts[k, 1], theta))
    poses.append(Pose2D(pts[-1, 0], pts[-1, 1], snapped.theta))
    return WorldPath(tuple(poses))


def generate_intermediate_goals(world: WorldMap, path: WorldPath, *,
                                max_range: float = DEFAULT_MAX_RANGE,
                                hfov: float = DEFAULT_HFOV,
                                fov_only: bool = False) -> GoalArray:
    """Walk the global path and drop an intermediate goal at the last pose
    that keeps the frame constraint, i.e. right before visibility from the
    current vantage breaks or the next pose falls out of range.

    Raises FrameGap when the walk requires a pose that is itself not visible
    from the current vantage, which means no frame-to-frame chain exists
    along this path.
    """
    poses = path.poses
    cur = poses[0]
    seq = poses[1:]
    if not visible(world, cur, seq[0], max_range=max_range, hfov=hfov, fov_only=fov_only):
        raise FrameGap("first path pose is not visible from the start")
    goals: list[Pose2D] = []
    for i in range(len(seq) - 1):
        vis_i = visible(world, cur, seq[i], max_range=max_range, hfov=hfov, fov_only=fov_only)
        vis_next = visible(world, cur, seq[i + 1], max_range=max_range, hfov=hfov,
                           fov_only=fov_only)
        too_far = cur.distance_to(seq[i + 1]) > max_range
        if (vis_i and not vis_next) or too_far:
            if not vis_i:
                raise FrameGap(f"path pose {i + 1} breaks the visibility chain")
            goals.append(seq[i])
            cur = seq[i]
    if cur.distance_to(seq[-1]) > max_range:
        raise FrameGap("final path pose is beyond sensor range of the last vantage")
    goals.append(seq[-1])
    return GoalArray(tuple(goals), max_range)


def sense_costmap(world: WorldMap, robot: Pose2D, rng: np.random.Generator, *,
                  noise: float = 0.0, max_range: float = DEFAULT_MAX_RANGE,
                  hfov: float = DEFAULT_HFOV,
                  with_crop: bool = False) -> Costmap | tuple[Costmap, Costmap]:
    """Simulated perception: a lattice-aligned window around the robot whose
    cells copy the true state wherever the cell center passes the range,
    field-of-view and line-of-sight tests, and stay Unknown elsewhere. Cells
    within the footprint-clearance disc (NEAR_SENSE_M) skip the field-of-view
    test but still need line of sight.

    Sensed cells flip Free/Occupied with probability `noise`; the robot's
    own cell is always sensed and never flipped. Cell centers coincide with
    the world lattice, so at zero noise the sensed map never contradicts the
    world.

    With `with_crop` the uncorrupted ground-truth crop over the same visible
    cells is returned alongside, the reference for per-leg map quality: at
    zero noise the two maps are identical."""
    cmap = world.costmap
    res = cmap.resolution
    cell = cmap.cell_of(robot.x, robot.y)
    if cell is None:
        raise ContractViolation("robot is outside the world")
    ci, cj = cell
    side = 2 * SENSE_HALF_CELLS + 1
    origin = Pose2D(
        cmap.origin.x + (ci - SENSE_HALF_CELLS) * res,
        cmap.origin.y + (cj - SENSE_HALF_CELLS) * res,
        0.0,
    )
    sensed = np.full((side, side), UNKNOWN, dtype=np.uint8)

    jj, ii = np.mgrid[0:side, 0:side]
    wi = ii + ci - SENSE_HALF_CELLS
    wj = jj + cj - SENSE_HALF_CELLS
    inb = (wi >= 0) & (wi < cmap.width) & (wj >= 0) & (wj < cmap.height)
    cx = origin.x + (ii + 0.5) * res
    cy = origin.y + (jj + 0.5) * res
    dx = cx - robot.x
    dy = cy - robot.y
    dist = np.hypot(dx, dy)
    bearing_off = np.abs(
        ((np.arctan2(dy, dx) - robot.theta + math.pi) % (2 * math.pi)) - math.pi
    )
    in_fov = bearing_off <= hfov / 2.0 + 1e-12
    # cells inside the footprint-clearance disc are known at any bearing,
    # otherwise the robot's own cell can end up 4-conn isolated at the
    # field-of-view apex and every leg plan degenerates to a zero move
    in_fov |= dist <= NEAR_SENSE_M + 1e-9
    cand = inb & (dist <= max_range + 1e-9) & in_fov
    cand[SENSE_HALF_CELLS, SENSE_HALF_CELLS] = True  # robot cell: always sensed

    grid = cmap.cells
    flat = np.nonzero(cand.ravel())[0]  # fixed row-major order: deterministic noise draw
    flips = rng.random(len(flat)) < noise if noise > 0 else np.zeros(len(flat), dtype=bool)
    center_flat = SENSE_HALF_CELLS * side + SENSE_HALF_CELLS
    sj = flat // side
    si = flat % side
    wx = wi[sj, si]
    wy = wj[sj, si]
    tx = cx[sj, si]
    ty = cy[sj, si]
    is_center = flat == center_flat

    # batch LOS: sample each ray strictly before the target cell center and
    # look for an Occupied cell other than the target's own
    n_steps = np.maximum(1, np.ceil(dist[sj, si] / LOS_STEP).astype(int))
    m = n_steps - 1
    total = int(m.sum())
    blocked = np.zeros(len(flat), dtype=bool)
    if total:
        ray = np.repeat(np.arange(len(flat)), m)
        ends = np.cumsum(m)
        s = np.arange(total) - np.repeat(ends - m, m) + 1
        t = s / n_steps[ray]
        px = robot.x + t * (tx[ray] - robot.x)
        py = robot.y + t * (ty[ray] - robot.y)
        gx = np.floor((px - cmap.origin.x) / res).astype(int)
        gy = np.floor((py - cmap.origin.y) / res).astype(int)
        inb_s = (gx >= 0) & (gx < cmap.width) & (gy >= 0) & (gy < cmap.height)
        occ = np.zeros(total, dtype=bool)
        occ[inb_s] = grid[gy[inb_s], gx[inb_s]] == OCCUPIED
        occ &= ~((gx == wx[ray]) & (gy == wy[ray]))
        blocked = np.bincount(ray[occ], minlength=len(flat)) > 0
    blocked &= ~is_center

    vis = ~blocked
    states = grid[wy, wx].copy()
    crop_cells = None
    if with_crop:
        crop_cells = np.full((side, side), UNKNOWN, dtype=np.uint8)
        crop_cells[sj[vis], si[vis]] = states[vis]
    toggle = flips & ~is_center
    states[toggle] = np.where(states[toggle] == FREE, OCCUPIED, FREE)
    sensed[sj[vis], si[vis]] = states[vis]
    out = Costmap(sensed, res, origin)
    if with_crop:
        return out, Costmap(crop_cells, res, origin)
    return out


@dataclass(frozen=True)
class NavigationReport:
    outcome: str  # success | collision | goal_unreachable | stuck | no_path
    legs: int
    collisions: int
    distance_m: float
    turning_costs: tuple[float, ...]
    qualities: tuple[float, ...]  # per-leg sensed-vs-true costmap distance
    goals: tuple[Pose2D, ...] = ()
    trace: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def mean_tc(self) -> float | None:
        return sum(self.turning_costs) / len(self.turning_costs) if self.turning_costs else None

    @property
    def mean_quality(self) -> float | None:
        return sum(self.qualities) / len(self.qualities) if self.qualities else None


def _reachable_snap(sensed: Costmap, robot: Pose2D, target: Pose2D) -> Pose2D:
    # 4-connected components: a diagonal grid move is only legal when both
    # orthogonal neighbors are Free, so planner reachability collapses to
    # 4-connectivity; 8-connected labeling would chase diagonal-only strings
    # of cells along the sensed wedge boundary that no planner can traverse.
    free = sensed.free_mask
    cell = sensed.cell_of(robot.x, robot.y)
    labels, _ = ndimage.label(free)
    within = labels == labels[cell[1], cell[0]]
    return snap_goal(sensed, target, within=within)


def simulate_navigation(world: WorldMap, start: Pose2D, goal: Pose2D, *,
                        params: PlannerParams | None = None, noise: float = 0.0,
                        seed: int = 0, max_range: float = DEFAULT_MAX_RANGE,
                        hfov: float = DEFAULT_HFOV, goal_tolerance: float = 0.2,
                        leg_tolerance: float = 0.2, max_legs: int = 60,
                        fov_only: bool = False) -> NavigationReport:
    """Closed-loop run: plan a privileged global route, extract intermediate
    goals, then repeatedly point-turn toward the active goal, sense, plan a
    local leg on the sensed map, and execute it on the true map.

    The robot is a point; entering an Occupied world cell ends the run as a
    collision. Legs that cannot reach the active goal snap it to the nearest
    sensed-reachable Free cell and keep going, so transient phantom
    obstacles only cost legs, not the mission. A mission goal that does not
    lie on a Free world cell is walked to its snapped stand-in, but the run
    reports goal_unreachable since the true goal can never be attained.
    """
    params = params or PlannerParams()
    rng = np.random.default_rng(np.random.SeedSequence((int(seed) & 0xFFFFFFFF, 0x5E45)))
    cmap = world.costmap
    gcell = cmap.cell_of(goal.x, goal.y)
    goal_feasible = gcell is not None and cmap.cells[gcell[1], gcell[0]] == FREE

    def report(outcome, **kw):
        return NavigationReport(
            outcome=outcome,
            legs=kw.get("legs", 0),
            collisions=kw.get("collisions", 0),
            distance_m=kw.get("distance_m", 0.0),
            turning_costs=tuple(kw.get("turning_costs", ())),
            qualities=tuple(kw.get("qualities", ())),
            goals=tuple(kw.get("goals", ())),
            trace=tuple(kw.get("trace", ())),
        )

    try:
        route = plan_global(world, start, goal, params=PlannerParams(algorithm="prm", seed=seed))
        goal_array = generate_intermediate_goals(world, route, max_range=max_range, hfov=hfov,
                                                 fov_only=fov_only)
    except (NoPathFound, NoFreeSpace):
        return report("goal_unreachable")
    except FrameGap:
        return report("no_path", goals=())

    robot = start
    legs = 0
    collisions = 0
    distance = 0.0
    tcs: list[float] = []
    quals: list[float] = []
    trace: list[tuple[float, float]] = [(robot.x, robot.y)]

    def done(outcome):
        return report(outcome, legs=legs, collisions=collisions, distance_m=distance,
                      turning_costs=tcs, qualities=quals, goals=goal_array.poses, trace=trace)

    gi = 0
    while gi < len(goal_array):
        target = goal_array.poses[gi]
        tol = goal_tolerance if gi == len(goal_array) - 1 else leg_tolerance
        if robot.distance_to(target) <= tol:
            gi += 1
            continue
        if legs >= max_legs:
            return done("stuck")
        legs += 1

        # point-turn toward the active goal, then sense with that heading
        robot = Pose2D(robot.x, robot.y, math.atan2(target.y - robot.y, target.x - robot.x))
        sensed, crop = sense_costmap(world, robot, rng, noise=noise, max_range=max_range,
                                     hfov=hfov, with_crop=True)
        quals.append(costmap_distance(sensed, crop))

        try:
            leg_goal = _reachable_snap(sensed, robot, target)
            gp = plan(sensed, robot, leg_goal, params)
            planned = resample(gp, leg_goal)
        except (NoPathFound, NoFreeSpace):
            return done("no_path")
        tcs.append(turning_cost(planned, initial_heading=robot.theta))

        # execute on the true map, watching for occupied-cell intrusions
        pos = planned.positions
        heading = robot.theta
        visited: set[tuple[int, int]] = set()
        hit = False
        for a, b in zip(pos[:-1], pos[1:]):
            seg = math.hypot(b[0] - a[0], b[1] - a[1])
            if seg > 0:
                heading = math.atan2(b[1] - a[1], b[0] - a[0])
            n = max(1, int(math.ceil(seg / LOS_STEP)))
            for s in range(1, n + 1):
                t = s / n
                px = a[0] + t * (b[0] - a[0])
                py = a[1] + t * (b[1] - a[1])
                cell = cmap.cell_of(px, py)
                if cell is None:
                    hit = True
                    break
                if cmap.cells[cell[1], cell[0]] == OCCUPIED and cell not in visited:
                    visited.add(cell)
                    collisions += 1
                    hit = True
            if hit:
                break
            distance += seg
            trace.append((float(b[0]), float(b[1])))
        if hit:
            return done("collision")

        moved = math.hypot(pos[-1, 0] - robot.x, pos[-1, 1] - robot.y)
        robot = Pose2D(float(pos[-1, 0]), float(pos[-1, 1]), heading)
        if moved < 0.05 and robot.distance_to(target) > tol:
            return done("stuck")
    return done("success" if goal_feasible else "goal_unreachable")
