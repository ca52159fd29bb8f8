"""Independent reference implementations used as test oracles.

Everything here is deliberately written from scratch against the documented
contracts, not by calling into wheelplan internals: Dijkstra with its own
neighbor logic, brute-force disc morphology with plain loops, and a plane
fit that scans phi densely solving least squares at every angle. Where a
derived value has to match a library value exactly (path costs), both sides
reduce to the same canonical expression n_straight*res + n_diag*(res*sqrt(2)),
which is unambiguous because sqrt(2) is irrational: equal costs force equal
step counts.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def dijkstra_cost(free: np.ndarray, start: tuple[int, int], goal: tuple[int, int],
                  resolution: float = 0.1) -> float | None:
    """Uniform-cost search over the 8-connected grid, no corner cutting.

    free is indexed [iy, ix]; start/goal are (ix, iy). Returns the optimal
    metric cost via the canonical step-count formula, or None when the goal
    is unreachable.
    """
    h, w = free.shape
    sx, sy = start
    gx, gy = goal
    if not (free[sy, sx] and free[gy, gx]):
        return None
    dist: dict[tuple[int, int], float] = {(sx, sy): 0.0}
    steps: dict[tuple[int, int], tuple[int, int]] = {(sx, sy): (0, 0)}
    pq = [(0.0, sx, sy)]
    done = set()
    while pq:
        g, x, y = heapq.heappop(pq)
        if (x, y) in done:
            continue
        done.add((x, y))
        if (x, y) == (gx, gy):
            s, d = steps[(x, y)]
            return s * resolution + d * (resolution * SQRT2)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or not free[ny, nx]:
                    continue
                diag = dx != 0 and dy != 0
                if diag and not (free[y, nx] and free[ny, x]):
                    continue  # both orthogonal neighbors must be open
                ng = g + (SQRT2 if diag else 1.0)
                if ng < dist.get((nx, ny), math.inf):
                    dist[(nx, ny)] = ng
                    s, d = steps[(x, y)]
                    steps[(nx, ny)] = (s, d + 1) if diag else (s + 1, d)
                    heapq.heappush(pq, (ng, nx, ny))
    return None


def disc_offsets(radius_cells: int) -> list[tuple[int, int]]:
    """All integer offsets with di^2 + dj^2 <= radius_cells^2, exact."""
    r2 = radius_cells * radius_cells
    out = []
    for dj in range(-radius_cells, radius_cells + 1):
        for di in range(-radius_cells, radius_cells + 1):
            if di * di + dj * dj <= r2:
                out.append((di, dj))
    return out


def brute_dilate(mask: np.ndarray, radius_cells: int) -> np.ndarray:
    """Set every cell within the disc of a set cell, by plain loops."""
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    offs = disc_offsets(radius_cells)
    for j in range(h):
        for i in range(w):
            if mask[j, i]:
                for di, dj in offs:
                    x, y = i + di, j + dj
                    if 0 <= x < w and 0 <= y < h:
                        out[y, x] = True
    return out


def brute_erode(mask: np.ndarray, radius_cells: int) -> np.ndarray:
    """Keep a cell only if its whole disc neighborhood is set; cells whose
    disc pokes out of the map are dropped (out of bounds counts as unset)."""
    h, w = mask.shape
    out = np.zeros_like(mask, dtype=bool)
    offs = disc_offsets(radius_cells)
    for j in range(h):
        for i in range(w):
            if not mask[j, i]:
                continue
            ok = True
            for di, dj in offs:
                x, y = i + di, j + dj
                if not (0 <= x < w and 0 <= y < h) or not mask[y, x]:
                    ok = False
                    break
            out[j, i] = ok
    return out


def plane_oracle(u, v, g) -> tuple[float, float, float, float]:
    """Least-squares plane fit by dense phi scanning.

    For each candidate angle solves g ~ a0 + a1*(-u sin(phi) + v cos(phi))
    with numpy lstsq and keeps the smallest mean squared residual. Three
    progressively finer scans bottom out at a 2e-4 degree grid, two orders
    of magnitude below the 0.01 degree acceptance tolerance.

    Returns (a0, a1, phi_rad, mean_squared_residual).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = np.asarray(g, dtype=float)

    def solve(phi: float) -> tuple[float, float, float]:
        t = -u * math.sin(phi) + v * math.cos(phi)
        a = np.column_stack([np.ones_like(t), t])
        coef, *_ = np.linalg.lstsq(a, g, rcond=None)
        r = g - a @ coef
        return float(coef[0]), float(coef[1]), float(np.mean(r * r))

    best = (math.inf, 0.0, 0.0, 0.0)  # (residual, a0, a1, phi)
    for lo, hi, step_deg in ((-45.0, 45.0, 0.5), (None, None, 1e-2), (None, None, 2e-4)):
        if lo is None:
            lo = math.degrees(best[3]) - 60 * step_deg
            hi = math.degrees(best[3]) + 60 * step_deg
        for phi_deg in np.arange(lo, hi + step_deg / 2, step_deg):
            phi = math.radians(float(phi_deg))
            a0, a1, res = solve(phi)
            if res < best[0]:
                best = (res, a0, a1, phi)
    res, a0, a1, phi = best
    return a0, a1, phi, res


def turning_cost_oracle(points, goal_theta: float, initial_heading: float = 0.0) -> float:
    """Direct angle summation over the 25-node convention: first node turns
    from the initial heading, last node turns onto the goal heading,
    zero-length segments inherit the previous direction."""
    pts = np.asarray(points, dtype=float)
    heading = initial_heading
    total = 0.0
    for i in range(len(pts) - 1):
        dx, dy = pts[i + 1] - pts[i]
        if dx == 0.0 and dy == 0.0:
            continue
        d = math.atan2(dy, dx)
        a = (d - heading) % (2 * math.pi)
        if a > math.pi:
            a -= 2 * math.pi
        total += abs(a)
        heading = d
    a = (goal_theta - heading) % (2 * math.pi)
    if a > math.pi:
        a -= 2 * math.pi
    total += abs(a)
    return total / (25 * (math.pi / 2))


def random_free_grid(rng: np.random.Generator, w: int, h: int, density: float) -> np.ndarray:
    """Obstacle grid for planner comparisons: True = Free."""
    return rng.random((h, w)) >= density
