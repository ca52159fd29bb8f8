"""Sampling-based planners over the costmap: RRT* and PRM.

Edges are validated against the grid by exact cell traversal, so a returned
polyline only ever crosses Free cells and downstream segment collision checks
cannot disagree with the planner.
"""

from __future__ import annotations

import heapq
import math

import numpy as np
from scipy.spatial import cKDTree

from ..costmap import Costmap
from ..errors import NoPathFound
from ..geometry import Pose2D, polyline_length
from .core import (
    GridPath,
    PlannerParams,
    segment_cells_free,
    shortcut_smooth,
    start_goal_cells,
    trace_polyline_cells,
)


def _extent(cmap: Costmap) -> tuple[float, float, float, float]:
    x0, y0 = cmap.origin.x, cmap.origin.y
    return x0, y0, x0 + cmap.width * cmap.resolution, y0 + cmap.height * cmap.resolution


def _free_bbox(cmap: Costmap) -> tuple[float, float, float, float]:
    """Sampling domain: the bounding box of Free cells. On partially observed
    maps this keeps samples near traversable space instead of wasting the
    iteration budget on Unknown regions."""
    jj, ii = np.nonzero(cmap.free_mask)
    if len(jj) == 0:
        return _extent(cmap)
    res = cmap.resolution
    return (
        cmap.origin.x + ii.min() * res,
        cmap.origin.y + jj.min() * res,
        cmap.origin.x + (ii.max() + 1) * res,
        cmap.origin.y + (jj.max() + 1) * res,
    )


def _finish(cmap: Costmap, waypoints: np.ndarray, algorithm: str, params: PlannerParams,
            history: tuple[float, ...] | None = None) -> GridPath:
    if params.smooth and len(waypoints) > 2:
        waypoints = shortcut_smooth(waypoints, lambda a, b: segment_cells_free(cmap, a, b))
    return GridPath(
        cells=trace_polyline_cells(cmap, waypoints),
        waypoints=waypoints,
        cost_m=polyline_length(waypoints),
        algorithm=algorithm,
        cost_history=history,
    )


def plan_rrt_star(cmap: Costmap, start: Pose2D, goal: Pose2D, params: PlannerParams) -> GridPath:
    """RRT* with neighborhood rewiring.

    The per-iteration best goal cost is recorded in cost_history (inf until a
    connection exists); rewiring propagates cost improvements through whole
    subtrees, so the history never increases.
    """
    start_goal_cells(cmap, start, goal)
    rng = np.random.default_rng(params.seed)
    x_lo, y_lo, x_hi, y_hi = _free_bbox(cmap)
    gx, gy = goal.x, goal.y

    cap = params.max_iters + 1
    xs = np.empty(cap)
    ys = np.empty(cap)
    cost = np.empty(cap)
    parent = np.full(cap, -1, dtype=int)
    children: list[list[int]] = [[] for _ in range(cap)]
    xs[0], ys[0], cost[0] = start.x, start.y, 0.0
    n = 1

    goal_nodes: list[int] = []
    goal_conn: dict[int, float] = {}

    def try_goal(idx: int) -> None:
        d = math.hypot(xs[idx] - gx, ys[idx] - gy)
        if d <= params.goal_tolerance and segment_cells_free(cmap, (xs[idx], ys[idx]), (gx, gy)):
            goal_nodes.append(idx)
            goal_conn[idx] = d

    try_goal(0)
    history = []
    best = math.inf
    for _ in range(params.max_iters):
        if rng.random() < params.goal_bias:
            sx, sy = gx, gy
        else:
            sx = rng.uniform(x_lo, x_hi)
            sy = rng.uniform(y_lo, y_hi)
        d2 = (xs[:n] - sx) ** 2 + (ys[:n] - sy) ** 2
        nearest = int(np.argmin(d2))
        d = math.sqrt(d2[nearest])
        if d < 1e-12:
            history.append(best)
            continue
        t = min(params.rrt_step, d) / d
        px = xs[nearest] + t * (sx - xs[nearest])
        py = ys[nearest] + t * (sy - ys[nearest])

        radius = min(params.rewire_gamma * math.sqrt(math.log(n) / n), 0.9) if n > 1 else 0.0
        nd2 = (xs[:n] - px) ** 2 + (ys[:n] - py) ** 2
        near = np.nonzero(nd2 <= radius * radius)[0]
        cand = list(near) if nearest in near else [nearest, *near]

        best_parent = -1
        best_cost = math.inf
        dists = {}
        for i in cand:
            di = math.sqrt(nd2[i])
            c = cost[i] + di
            if c < best_cost and segment_cells_free(cmap, (xs[i], ys[i]), (px, py)):
                best_parent, best_cost, dists[i] = int(i), c, di
        if best_parent < 0:
            history.append(best)
            continue

        new = n
        xs[new], ys[new], cost[new] = px, py, best_cost
        parent[new] = best_parent
        children[best_parent].append(new)
        n += 1

        # rewire the neighborhood through the new node
        for i in near:
            i = int(i)
            if i == best_parent:
                continue
            di = dists.get(i, math.sqrt(nd2[i]))
            c = best_cost + di
            if c + 1e-12 < cost[i] and segment_cells_free(cmap, (px, py), (xs[i], ys[i])):
                children[parent[i]].remove(i)
                parent[i] = new
                children[new].append(i)
                delta = cost[i] - c
                stack = [i]
                while stack:
                    j = stack.pop()
                    cost[j] -= delta
                    stack.extend(children[j])

        try_goal(new)
        if goal_nodes:
            cur = min(cost[i] + goal_conn[i] for i in goal_nodes)
            if cur < best:
                best = cur
        history.append(best)

    if not goal_nodes:
        raise NoPathFound("tree never reached the goal tolerance")
    end = min(goal_nodes, key=lambda i: (cost[i] + goal_conn[i], i))
    chain = [end]
    while parent[chain[-1]] >= 0:
        chain.append(parent[chain[-1]])
    chain.reverse()
    pts = np.array([(xs[i], ys[i]) for i in chain] + [(gx, gy)])
    return _finish(cmap, pts, "rrtstar", params, history=tuple(history))


def plan_prm(cmap: Costmap, start: Pose2D, goal: Pose2D, params: PlannerParams) -> GridPath:
    """Probabilistic roadmap: rejection-sample Free poses, connect k nearest
    neighbors with validated edges, run Dijkstra start to goal."""
    start_goal_cells(cmap, start, goal)
    rng = np.random.default_rng(params.seed)
    x_lo, y_lo, x_hi, y_hi = _free_bbox(cmap)
    free = cmap.free_mask
    ox, oy = cmap.origin.x, cmap.origin.y

    pts = [(start.x, start.y), (goal.x, goal.y)]
    attempts = 0
    limit = 200 * params.prm_samples
    while len(pts) < params.prm_samples + 2 and attempts < limit:
        attempts += 1
        sx = rng.uniform(x_lo, x_hi)
        sy = rng.uniform(y_lo, y_hi)
        ix = int((sx - ox) / cmap.resolution)
        iy = int((sy - oy) / cmap.resolution)
        if 0 <= ix < cmap.width and 0 <= iy < cmap.height and free[iy, ix]:
            pts.append((sx, sy))
    nodes = np.array(pts)
    m = len(nodes)

    tree = cKDTree(nodes)
    k = min(params.prm_k + 1, m)
    dist, idx = tree.query(nodes, k=k)
    adj: list[list[tuple[int, float]]] = [[] for _ in range(m)]
    seen = set()
    for i in range(m):
        for j_col in range(1, k):
            j = int(idx[i, j_col])
            key = (min(i, j), max(i, j))
            if key in seen:
                continue
            seen.add(key)
            if segment_cells_free(cmap, nodes[i], nodes[j]):
                d = float(dist[i, j_col])
                adj[i].append((j, d))
                adj[j].append((i, d))

    best = np.full(m, np.inf)
    best[0] = 0.0
    prev = np.full(m, -1, dtype=int)
    heap = [(0.0, 0)]
    done = np.zeros(m, dtype=bool)
    while heap:
        d, i = heapq.heappop(heap)
        if done[i]:
            continue
        done[i] = True
        if i == 1:
            break
        for j, w in adj[i]:
            nd = d + w
            if nd < best[j]:
                best[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))
    if not done[1]:
        raise NoPathFound("roadmap does not connect start and goal")
    chain = [1]
    while chain[-1] != 0:
        chain.append(int(prev[chain[-1]]))
    chain.reverse()
    return _finish(cmap, nodes[chain], "prm", params)
