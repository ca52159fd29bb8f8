"""Seeded benchmark worlds: ground-truth occupancy grids with start and goal
poses. Cells are configuration-space states (Free is safe for the robot), so
planners and the navigation simulator treat the robot as a point."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .costmap import DEFAULT_RESOLUTION, FREE, OCCUPIED, Costmap
from .geometry import Pose2D

_BORDER = 2  # cells


def _blank(n: int) -> np.ndarray:
    cells = np.full((n, n), FREE, dtype=np.uint8)
    cells[:_BORDER, :] = OCCUPIED
    cells[-_BORDER:, :] = OCCUPIED
    cells[:, :_BORDER] = OCCUPIED
    cells[:, -_BORDER:] = OCCUPIED
    return cells


def _clear_disc(cells: np.ndarray, x: float, y: float, r: float, res: float) -> None:
    n = cells.shape[0]
    jj, ii = np.mgrid[0:n, 0:n]
    cx = (ii + 0.5) * res
    cy = (jj + 0.5) * res
    inner = (cx - x) ** 2 + (cy - y) ** 2 <= r * r
    inner[:_BORDER, :] = inner[-_BORDER:, :] = False
    inner[:, :_BORDER] = inner[:, -_BORDER:] = False
    cells[inner] = FREE


def _connected(cells: np.ndarray, a: Pose2D, b: Pose2D, res: float) -> bool:
    free = cells == FREE
    labels, _ = ndimage.label(free, structure=np.ones((3, 3), dtype=int))
    ai, aj = int(a.x / res), int(a.y / res)
    bi, bj = int(b.x / res), int(b.y / res)
    return bool(free[aj, ai] and free[bj, bi] and labels[aj, ai] == labels[bj, bi])


def open_world(seed: int, *, size_m: float = 20.0, resolution: float = DEFAULT_RESOLUTION,
               n_obstacles: int = 12) -> tuple[Costmap, Pose2D, Pose2D]:
    """Bordered square with scattered boxes and discs; start near one corner,
    goal near the opposite one. Re-rolls until start and goal connect."""
    rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFF, 0x09E9)))
    n = int(round(size_m / resolution))
    start = Pose2D(float(rng.uniform(1.0, 3.0)), float(rng.uniform(1.0, 3.0)), 0.0)
    goal = Pose2D(
        float(rng.uniform(size_m - 3.0, size_m - 1.0)),
        float(rng.uniform(size_m - 3.0, size_m - 1.0)),
        float(rng.uniform(-math.pi, math.pi)),
    )
    for _ in range(50):
        cells = _blank(n)
        jj, ii = np.mgrid[0:n, 0:n]
        cx = (ii + 0.5) * resolution
        cy = (jj + 0.5) * resolution
        for _k in range(n_obstacles):
            ox = rng.uniform(2.0, size_m - 2.0)
            oy = rng.uniform(2.0, size_m - 2.0)
            if rng.random() < 0.5:
                w = rng.uniform(0.4, 2.2)
                h = rng.uniform(0.4, 2.2)
                hit = (np.abs(cx - ox) <= w / 2) & (np.abs(cy - oy) <= h / 2)
            else:
                r = rng.uniform(0.3, 1.1)
                hit = (cx - ox) ** 2 + (cy - oy) ** 2 <= r * r
            cells[hit] = OCCUPIED
        _clear_disc(cells, start.x, start.y, 0.8, resolution)
        _clear_disc(cells, goal.x, goal.y, 0.8, resolution)
        if _connected(cells, start, goal, resolution):
            return Costmap(cells, resolution, Pose2D(0.0, 0.0, 0.0)), start, goal
    cells = _blank(n)
    return Costmap(cells, resolution, Pose2D(0.0, 0.0, 0.0)), start, goal


def corridor_world(seed: int, *, size_m: float = 20.0, resolution: float = DEFAULT_RESOLUTION,
                   n_walls: int = 3, corridor_width: float = 1.5) -> tuple[Costmap, Pose2D, Pose2D]:
    """Rooms separated by full-height walls, each pierced by one or two
    door gaps of the corridor width. Start sits in the left room, goal in
    the right room; connectivity holds by construction."""
    rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFF, 0xC021)))
    n = int(round(size_m / resolution))
    cells = _blank(n)
    gap_half = max(2, int(round(corridor_width / resolution / 2)))
    thickness = 2
    for k in range(n_walls):
        wx = int(round(n * (k + 1) / (n_walls + 1)))
        cells[:, wx : wx + thickness] = OCCUPIED
        for _d in range(int(rng.integers(1, 3))):
            gc = int(rng.integers(_BORDER + gap_half + 2, n - _BORDER - gap_half - 2))
            cells[gc - gap_half : gc + gap_half, wx : wx + thickness] = FREE

    first_wall = int(round(n / (n_walls + 1))) * resolution
    last_wall = int(round(n * n_walls / (n_walls + 1))) * resolution
    start = Pose2D(
        float(rng.uniform(0.6, max(0.9, first_wall - 0.6))),
        float(rng.uniform(0.8, size_m - 0.8)),
        0.0,
    )
    # keep the clearing discs strictly off the walls
    goal = Pose2D(
        float(rng.uniform(min(last_wall + 0.85, size_m - 0.9), size_m - 0.6)),
        float(rng.uniform(0.8, size_m - 0.8)),
        float(rng.uniform(-math.pi, math.pi)),
    )
    _clear_disc(cells, start.x, start.y, 0.5, resolution)
    _clear_disc(cells, goal.x, goal.y, 0.5, resolution)
    return Costmap(cells, resolution, Pose2D(0.0, 0.0, 0.0)), start, goal
