"""Jump point search on the same movement rules as A* (diagonal moves only
when both adjacent orthogonal cells are Free).

Straight jumps scan until a forced neighbor appears behind the direction of
travel; diagonal jumps re-probe both straight components at every step. Jumps
are iterative loops, so long corridors cannot overflow the stack. Expanded
costs reuse the canonical step formula, which keeps optimal costs bit-equal
to A*.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..costmap import Costmap
from ..errors import NoPathFound
from ..geometry import Pose2D
from .core import (
    SQRT2,
    GridPath,
    cell_centers,
    neighbors,
    octile_steps,
    path_cost_m,
    start_goal_cells,
)


def _jump_straight(walk, x, y, dx, dy, goal):
    """Scan from (x, y) along a cardinal direction; return the next jump
    point or None when the scan hits a blocked cell."""
    while True:
        x += dx
        y += dy
        if not walk(x, y):
            return None
        if (x, y) == goal:
            return (x, y)
        if dx != 0:
            if (walk(x, y - 1) and not walk(x - dx, y - 1)) or (
                walk(x, y + 1) and not walk(x - dx, y + 1)
            ):
                return (x, y)
        else:
            if (walk(x - 1, y) and not walk(x - 1, y - dy)) or (
                walk(x + 1, y) and not walk(x + 1, y - dy)
            ):
                return (x, y)


def _jump_diagonal(walk, x, y, dx, dy, goal):
    """Scan from (x, y) along a diagonal; a step is legal only when both
    orthogonal cells are open. The landing cell is a jump point when either
    straight probe from it finds one."""
    while True:
        if not (walk(x + dx, y) and walk(x, y + dy)):
            return None
        x += dx
        y += dy
        if not walk(x, y):
            return None
        if (x, y) == goal:
            return (x, y)
        if _jump_straight(walk, x, y, dx, 0, goal) is not None:
            return (x, y)
        if _jump_straight(walk, x, y, 0, dy, goal) is not None:
            return (x, y)


def _pruned_directions(walk, x, y, px, py):
    """Directions to probe from (x, y) given arrival from parent (px, py)."""
    dx = (x > px) - (x < px)
    dy = (y > py) - (y < py)
    dirs = []
    if dx != 0 and dy != 0:
        v = walk(x, y + dy)
        h = walk(x + dx, y)
        if v:
            dirs.append((0, dy))
        if h:
            dirs.append((dx, 0))
        if v and h:
            dirs.append((dx, dy))
    elif dx != 0:
        fwd = walk(x + dx, y)
        up = walk(x, y + 1)
        dn = walk(x, y - 1)
        if fwd:
            dirs.append((dx, 0))
            if up:
                dirs.append((dx, 1))
            if dn:
                dirs.append((dx, -1))
        if up:
            dirs.append((0, 1))
        if dn:
            dirs.append((0, -1))
    else:
        fwd = walk(x, y + dy)
        rt = walk(x + 1, y)
        lt = walk(x - 1, y)
        if fwd:
            dirs.append((0, dy))
            if rt:
                dirs.append((1, dy))
            if lt:
                dirs.append((-1, dy))
        if rt:
            dirs.append((1, 0))
        if lt:
            dirs.append((-1, 0))
    return dirs


def _expand(jumps: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Fill in the unit steps between consecutive jump points."""
    out = [jumps[0]]
    for (ax, ay), (bx, by) in zip(jumps[:-1], jumps[1:]):
        sx = (bx > ax) - (bx < ax)
        sy = (by > ay) - (by < ay)
        cx, cy = ax, ay
        while (cx, cy) != (bx, by):
            cx += sx
            cy += sy
            out.append((cx, cy))
    return out


def jps_cells(free: np.ndarray, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
    """Optimal cell path via jump point search; raises NoPathFound."""
    if start == goal:
        return [start]
    h, w = free.shape

    def walk(x, y):
        return 0 <= x < w and 0 <= y < h and free[y, x]

    g_score = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    heap = [(octile_steps(start, goal), 0.0, start[1], start[0])]
    while heap:
        f, neg_g, iy, ix = heapq.heappop(heap)
        cur = (ix, iy)
        if cur in closed:
            continue
        if cur == goal:
            jumps = [cur]
            while cur in parent:
                cur = parent[cur]
                jumps.append(cur)
            jumps.reverse()
            return _expand(jumps)
        closed.add(cur)
        g = -neg_g
        if cur == start:
            dirs = [(nx - ix, ny - iy) for nx, ny, _ in neighbors(free, ix, iy)]
        else:
            px, py = parent[cur]
            dirs = _pruned_directions(walk, ix, iy, px, py)
        for dx, dy in dirs:
            if dx != 0 and dy != 0:
                jp = _jump_diagonal(walk, ix, iy, dx, dy, goal)
            else:
                jp = _jump_straight(walk, ix, iy, dx, dy, goal)
            if jp is None or jp in closed:
                continue
            steps = max(abs(jp[0] - ix), abs(jp[1] - iy))
            ng = g + steps * (SQRT2 if dx and dy else 1.0)
            if ng < g_score.get(jp, float("inf")) - 1e-12:
                g_score[jp] = ng
                parent[jp] = cur
                heapq.heappush(heap, (ng + octile_steps(jp, goal), -ng, jp[1], jp[0]))
    raise NoPathFound("no 8-connected route between start and goal")


def plan_jps(cmap: Costmap, start: Pose2D, goal: Pose2D) -> GridPath:
    s, g = start_goal_cells(cmap, start, goal)
    cells = jps_cells(cmap.free_mask, s, g)
    return GridPath(
        cells=tuple(cells),
        waypoints=cell_centers(cmap, cells),
        cost_m=path_cost_m(cells, cmap.resolution),
        algorithm="jps",
    )
