"""A* on the 8-connected Free grid with octile heuristic.

Ties on f prefer the larger g (deeper nodes), then smaller (row, col), which
makes the expansion order, and therefore the returned path, deterministic.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..costmap import Costmap
from ..errors import NoPathFound
from ..geometry import Pose2D
from .core import (
    GridPath,
    cell_centers,
    neighbors,
    octile_steps,
    path_cost_m,
    start_goal_cells,
)


def astar_cells(free: np.ndarray, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
    """Shortest 8-connected cell path in step units; raises NoPathFound."""
    if start == goal:
        return [start]
    g_score = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    h0 = octile_steps(start, goal)
    heap = [(h0, 0.0, start[1], start[0])]
    while heap:
        f, neg_g, iy, ix = heapq.heappop(heap)
        cur = (ix, iy)
        if cur in closed:
            continue
        if cur == goal:
            out = [cur]
            while cur in parent:
                cur = parent[cur]
                out.append(cur)
            out.reverse()
            return out
        closed.add(cur)
        g = -neg_g
        for nx, ny, diag in neighbors(free, ix, iy):
            nxt = (nx, ny)
            if nxt in closed:
                continue
            ng = g + (1.4142135623730951 if diag else 1.0)
            if ng < g_score.get(nxt, float("inf")) - 1e-12:
                g_score[nxt] = ng
                parent[nxt] = cur
                heapq.heappush(heap, (ng + octile_steps(nxt, goal), -ng, ny, nx))
    raise NoPathFound("no 8-connected route between start and goal")


def plan_astar(cmap: Costmap, start: Pose2D, goal: Pose2D) -> GridPath:
    s, g = start_goal_cells(cmap, start, goal)
    cells = astar_cells(cmap.free_mask, s, g)
    return GridPath(
        cells=tuple(cells),
        waypoints=cell_centers(cmap, cells),
        cost_m=path_cost_m(cells, cmap.resolution),
        algorithm="astar",
    )
