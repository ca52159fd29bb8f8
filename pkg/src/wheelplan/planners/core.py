"""Shared planner machinery: grid movement rules, goal snapping, segment
collision checks, exact grid traversal, path types and 25-node resampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..costmap import FREE, Costmap, is_traversable
from ..errors import ContractViolation, NoFreeSpace, ParseError
from ..geometry import Pose2D, cumulative_lengths, point_along_polyline, polyline_length

SQRT2 = math.sqrt(2.0)
N_PATH_NODES = 25

# 8-connected moves; diagonals require both adjacent orthogonal cells Free
# (no corner cutting), so path polylines never graze obstacle corners.
MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def neighbors(free: np.ndarray, ix: int, iy: int):
    """Yield legal (nx, ny, diagonal) moves from a cell."""
    h, w = free.shape
    for dx, dy in MOVES:
        nx, ny = ix + dx, iy + dy
        if not (0 <= nx < w and 0 <= ny < h) or not free[ny, nx]:
            continue
        if dx and dy and not (free[iy, ix + dx] and free[iy + dy, ix]):
            continue
        yield nx, ny, bool(dx and dy)


def octile_steps(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Octile distance in step units (straight=1, diagonal=sqrt2)."""
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    lo, hi = (dx, dy) if dx < dy else (dy, dx)
    return hi + (SQRT2 - 1.0) * lo


def path_cost_m(cells: list[tuple[int, int]], resolution: float) -> float:
    """Canonical metric length of a cell path: counts straight and diagonal
    steps and applies one closed-form float expression, so equal-cost paths
    from different planners produce bit-identical costs."""
    straight = diag = 0
    for (ax, ay), (bx, by) in zip(cells[:-1], cells[1:]):
        if ax != bx and ay != by:
            diag += 1
        else:
            straight += 1
    return straight * resolution + diag * (resolution * SQRT2)


@dataclass(frozen=True)
class PlannerParams:
    """Configuration for plan(); defaults follow the reference setup."""

    algorithm: str = "astar"  # astar | jps | rrtstar | prm
    seed: int = 0
    rrt_step: float = 0.3  # m
    goal_bias: float = 0.05
    max_iters: int = 5000
    rewire_gamma: float = 2.0
    goal_tolerance: float = 0.15  # m
    prm_samples: int = 800
    prm_k: int = 10
    smooth: bool = True

    def __post_init__(self):
        if self.algorithm not in ("astar", "jps", "rrtstar", "prm"):
            raise ContractViolation(f"unknown algorithm {self.algorithm!r}")
        if self.rrt_step <= 0 or self.max_iters < 1 or self.prm_samples < 1 or self.prm_k < 1:
            raise ContractViolation("planner parameters out of range")
        if not (0.0 <= self.goal_bias <= 1.0):
            raise ContractViolation("goal_bias must be in [0, 1]")
        if self.goal_tolerance <= 0 or self.rewire_gamma <= 0:
            raise ContractViolation("planner parameters out of range")


@dataclass(frozen=True)
class GridPath:
    """Planner output: 8-adjacent Free cells plus the continuous waypoint
    polyline the cells trace (cell centers for grid planners, smoothed
    waypoints for sampling planners)."""

    cells: tuple[tuple[int, int], ...]
    waypoints: np.ndarray
    cost_m: float
    algorithm: str
    cost_history: tuple[float, ...] | None = None  # per-iteration best (RRT*)

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple((int(a), int(b)) for a, b in self.cells))
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 2)
        wp.flags.writeable = False
        object.__setattr__(self, "waypoints", wp)
        for (ax, ay), (bx, by) in zip(self.cells[:-1], self.cells[1:]):
            if max(abs(ax - bx), abs(ay - by)) > 1:
                raise ContractViolation("grid path cells must be 8-adjacent")


@dataclass(frozen=True)
class PlannedPath:
    """Fixed 25-node path label: positions in meters plus the goal heading."""

    positions: np.ndarray
    goal_theta: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (N_PATH_NODES, 2):
            raise ContractViolation(f"path label must have {N_PATH_NODES} nodes")
        if not np.all(np.isfinite(pos)):
            raise ContractViolation("path nodes must be finite")
        pos = pos.copy()
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "goal_theta", float(self.goal_theta))

    @property
    def goal_pose(self) -> Pose2D:
        return Pose2D(self.positions[-1, 0], self.positions[-1, 1], self.goal_theta)


def snap_goal(cmap: Costmap, goal: Pose2D, within: np.ndarray | None = None) -> Pose2D:
    """Return the goal unchanged when it lies on a Free cell, otherwise the
    center of the nearest Free cell (ties broken by smaller (row, col)).

    `within` optionally restricts the candidate cells (e.g. to the component
    reachable from the robot). Raises NoFreeSpace when no candidate exists.
    """
    free = cmap.free_mask
    if within is not None:
        free = free & within
    cell = cmap.cell_of(goal.x, goal.y)
    if cell is not None and free[cell[1], cell[0]]:
        return goal
    jj, ii = np.nonzero(free)  # row-major: argmin ties resolve to smaller (row, col)
    if len(jj) == 0:
        raise NoFreeSpace("costmap contains no Free cell to snap to")
    cx = cmap.origin.x + (ii + 0.5) * cmap.resolution
    cy = cmap.origin.y + (jj + 0.5) * cmap.resolution
    k = int(np.argmin((cx - goal.x) ** 2 + (cy - goal.y) ** 2))
    return Pose2D(cx[k], cy[k], goal.theta)


def collision_check(cmap: Costmap, a, b, step: float = 0.05) -> bool:
    """True when every sample along segment a-b (spacing <= step, endpoints
    included) lies on a Free cell."""
    if step <= 0:
        raise ContractViolation("step must be positive")
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dist = math.hypot(bx - ax, by - ay)
    n = max(1, int(math.ceil(dist / step)))
    ts = np.linspace(0.0, 1.0, n + 1)
    xs = ax + ts * (bx - ax)
    ys = ay + ts * (by - ay)
    ix = np.floor((xs - cmap.origin.x) / cmap.resolution).astype(int)
    iy = np.floor((ys - cmap.origin.y) / cmap.resolution).astype(int)
    inb = (ix >= 0) & (ix < cmap.width) & (iy >= 0) & (iy < cmap.height)
    if not inb.all():
        return False
    return bool((cmap.cells[iy, ix] == FREE).all())


def traverse_cells(origin: Pose2D, resolution: float, a, b) -> list[tuple[int, int]]:
    """Every grid cell the segment a-b passes through, in order.

    Exact incremental traversal; when the segment crosses a cell corner the
    walk steps diagonally (the grazed side cells are not reported).
    """
    ax = (float(a[0]) - origin.x) / resolution
    ay = (float(a[1]) - origin.y) / resolution
    bx = (float(b[0]) - origin.x) / resolution
    by = (float(b[1]) - origin.y) / resolution
    ix, iy = int(math.floor(ax)), int(math.floor(ay))
    ex, ey = int(math.floor(bx)), int(math.floor(by))
    cells = [(ix, iy)]
    dx, dy = bx - ax, by - ay
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    if dx != 0:
        t_delta_x = abs(1.0 / dx)
        nxt = (ix + 1) if dx > 0 else ix
        t_max_x = (nxt - ax) / dx
    else:
        t_delta_x = math.inf
        t_max_x = math.inf
    if dy != 0:
        t_delta_y = abs(1.0 / dy)
        nxt = (iy + 1) if dy > 0 else iy
        t_max_y = (nxt - ay) / dy
    else:
        t_delta_y = math.inf
        t_max_y = math.inf
    guard = abs(ex - ix) + abs(ey - iy) + 4
    while (ix, iy) != (ex, ey) and guard > 0:
        guard -= 1
        if t_max_x < t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        elif t_max_y < t_max_x:
            iy += step_y
            t_max_y += t_delta_y
        else:  # exact corner: advance both
            ix += step_x
            iy += step_y
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        cells.append((ix, iy))
    if (ix, iy) != (ex, ey):
        cells.append((ex, ey))
    return cells


def segment_cells_free(cmap: Costmap, a, b) -> bool:
    """Exact edge validity: every traversed cell is in bounds and Free."""
    cells = traverse_cells(cmap.origin, cmap.resolution, a, b)
    grid = cmap.cells
    h, w = grid.shape
    for ix, iy in cells:
        if not (0 <= ix < w and 0 <= iy < h) or grid[iy, ix] != FREE:
            return False
    return True


def shortcut_smooth(waypoints: np.ndarray, edge_ok) -> np.ndarray:
    """Greedy shortcutting: from each kept waypoint, jump to the farthest
    later waypoint reachable by a valid straight edge. Deterministic."""
    pts = np.asarray(waypoints, dtype=float)
    if len(pts) <= 2:
        return pts.copy()
    out = [pts[0]]
    i = 0
    last = len(pts) - 1
    while i < last:
        j = last
        while j > i + 1 and not edge_ok(pts[i], pts[j]):
            j -= 1
        out.append(pts[j])
        i = j
    return np.array(out)


def trace_polyline_cells(cmap: Costmap, waypoints: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Concatenated traversal cells of a waypoint polyline, duplicates merged."""
    cells: list[tuple[int, int]] = []
    pts = np.asarray(waypoints, dtype=float)
    for a, b in zip(pts[:-1], pts[1:]):
        for c in traverse_cells(cmap.origin, cmap.resolution, a, b):
            if not cells or cells[-1] != c:
                cells.append(c)
    if not cells:
        c = cmap.cell_of(pts[0][0], pts[0][1])
        cells = [c] if c is not None else []
    return tuple(cells)


def resample(path: GridPath, goal: Pose2D) -> PlannedPath:
    """Arc-length resample the waypoint polyline to the fixed label layout:
    node i sits at fraction i/25 of the total length for i=1..24, node 25 is
    the snapped goal pose itself. A zero-length path degenerates to 24 copies
    of the start plus the goal."""
    pts = path.waypoints
    total = polyline_length(pts)
    if total <= 0.0:
        base = np.repeat(pts[:1], N_PATH_NODES - 1, axis=0)
    else:
        cum = cumulative_lengths(pts)
        base = np.array(
            [point_along_polyline(pts, cum, total * i / N_PATH_NODES) for i in range(1, N_PATH_NODES)]
        )
    nodes = np.vstack([base, [goal.x, goal.y]])
    return PlannedPath(nodes, goal.theta)


def write_path_csv(path, planned: PlannedPath, provenance: list[str] | None = None) -> None:
    """25 data rows `x,y`; the final row carries `x,y,theta`. `#` lines are
    provenance comments."""
    lines = [f"# {p}" for p in (provenance or [])]
    for k in range(N_PATH_NODES - 1):
        lines.append(f"{float(planned.positions[k, 0])!r},{float(planned.positions[k, 1])!r}")
    lines.append(
        f"{float(planned.positions[-1, 0])!r},{float(planned.positions[-1, 1])!r},"
        f"{float(planned.goal_theta)!r}"
    )
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_path_csv(path) -> PlannedPath:
    rows: list[list[str]] = []
    offset = 0
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if line and not line.startswith("#"):
                rows.append((line.split(","), offset))
            offset += len(raw)
    if len(rows) != N_PATH_NODES:
        raise ParseError(f"expected {N_PATH_NODES} path rows, found {len(rows)}", offset)
    pos = np.zeros((N_PATH_NODES, 2))
    theta = None
    for k, (fields, off) in enumerate(rows):
        want = 3 if k == N_PATH_NODES - 1 else 2
        if len(fields) != want:
            raise ParseError(f"row {k + 1}: expected {want} fields", off)
        try:
            pos[k] = (float(fields[0]), float(fields[1]))
            if want == 3:
                theta = float(fields[2])
        except ValueError:
            raise ParseError(f"row {k + 1}: non-numeric field", off) from None
    return PlannedPath(pos, theta)


def start_goal_cells(cmap: Costmap, start: Pose2D, goal: Pose2D) -> tuple[tuple[int, int], tuple[int, int]]:
    s = cmap.cell_of(start.x, start.y)
    g = cmap.cell_of(goal.x, goal.y)
    if s is None or not cmap.free_mask[s[1], s[0]]:
        raise ContractViolation("start must lie on a Free cell")
    if g is None or not cmap.free_mask[g[1], g[0]]:
        raise ContractViolation("goal must lie on a Free cell (snap it first)")
    return s, g


def cell_centers(cmap: Costmap, cells) -> np.ndarray:
    arr = np.asarray(cells, dtype=float)
    return np.column_stack(
        [
            cmap.origin.x + (arr[:, 0] + 0.5) * cmap.resolution,
            cmap.origin.y + (arr[:, 1] + 0.5) * cmap.resolution,
        ]
    )
