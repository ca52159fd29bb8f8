"""Planar geometry utilities: poses, convex hulls, polygon rasterization and
polyline arc-length operations used by the costmap and planner modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = a % TWO_PI  # [0, 2*pi)
    if a > math.pi:
        a -= TWO_PI
    return a


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in meters, heading in radians, normalized to (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.theta})")
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Pose2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull of 2-D points via the monotone chain, CCW order.

    Collinear boundary points are dropped. Degenerate inputs (fewer than 3
    distinct points, or all collinear) return the 1 or 2 extreme points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("expected (N, 2) points")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) <= 2:
        return np.array(uniq, dtype=float).reshape(len(uniq), 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(uniq):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:  # all collinear
        return np.array([uniq[0], uniq[-1]], dtype=float)
    return np.array(hull, dtype=float)


def rasterize_convex_polygon(
    vertices: np.ndarray,
    origin_xy: tuple[float, float],
    resolution: float,
    shape: tuple[int, int],
) -> np.ndarray:
    """Scanline-fill a convex polygon onto a grid.

    A cell is set when its center lies inside the polygon; boundary centers
    count as inside. Returns a bool array of the given (rows, cols) shape,
    row j covering y in [oy + j*res, oy + (j+1)*res).
    """
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or len(verts) < 3:
        return mask
    ox, oy = origin_xy
    ymin, ymax = verts[:, 1].min(), verts[:, 1].max()
    j0 = max(0, int(math.floor((ymin - oy) / resolution - 0.5)))
    j1 = min(h - 1, int(math.ceil((ymax - oy) / resolution - 0.5)))
    n = len(verts)
    for j in range(j0, j1 + 1):
        yc = oy + (j + 0.5) * resolution
        if yc < ymin or yc > ymax:
            continue
        xs: list[float] = []
        for k in range(n):
            ax, ay = verts[k]
            bx, by = verts[(k + 1) % n]
            if (ay <= yc <= by) or (by <= yc <= ay):
                if ay == by:
                    xs.extend((ax, bx))
                else:
                    t = (yc - ay) / (by - ay)
                    xs.append(ax + t * (bx - ax))
        if not xs:
            continue
        lo, hi = min(xs), max(xs)
        i0 = int(math.ceil((lo - ox) / resolution - 0.5 - 1e-9))
        i1 = int(math.floor((hi - ox) / resolution - 0.5 + 1e-9))
        i0 = max(i0, 0)
        i1 = min(i1, w - 1)
        if i0 <= i1:
            mask[j, i0 : i1 + 1] = True
    return mask


def points_in_convex_polygon(points: np.ndarray, vertices: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Inclusive membership test for (N, 2) points in a convex polygon.

    Works for either vertex winding; returns a bool array.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    verts = np.asarray(vertices, dtype=float)
    n = len(verts)
    if n < 3:
        return np.zeros(len(pts), dtype=bool)
    pos = np.ones(len(pts), dtype=bool)
    neg = np.ones(len(pts), dtype=bool)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cross = (bx - ax) * (pts[:, 1] - ay) - (by - ay) * (pts[:, 0] - ax)
        pos &= cross >= -tol
        neg &= cross <= tol
    return pos | neg


def point_in_convex_polygon(p, vertices: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(points_in_convex_polygon(np.asarray(p, dtype=float).reshape(1, 2), vertices, tol)[0])


def polyline_length(pts: np.ndarray) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.sum(np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))))


def cumulative_lengths(pts: np.ndarray) -> np.ndarray:
    """Arc length from the first point to each vertex."""
    pts = np.asarray(pts, dtype=float)
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    return np.concatenate([[0.0], np.cumsum(seg)])


def point_along_polyline(pts: np.ndarray, cum: np.ndarray, s: float) -> np.ndarray:
    """Point at arc length s along the polyline (clamped to the ends)."""
    pts = np.asarray(pts, dtype=float)
    if s <= 0.0:
        return pts[0].copy()
    if s >= cum[-1]:
        return pts[-1].copy()
    k = int(np.searchsorted(cum, s, side="right")) - 1
    k = min(max(k, 0), len(pts) - 2)
    seg = cum[k + 1] - cum[k]
    t = 0.0 if seg <= 0.0 else (s - cum[k]) / seg
    return pts[k] + t * (pts[k + 1] - pts[k])


def densify_polyline(pts: np.ndarray, max_spacing: float) -> np.ndarray:
    """Insert evenly spaced points on each segment so spacing <= max_spacing."""
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return pts.copy()
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        d = math.hypot(b[0] - a[0], b[1] - a[1])
        n = max(1, int(math.ceil(d / max_spacing)))
        for k in range(1, n + 1):
            out.append(a + (b - a) * (k / n))
    return np.array(out)


def point_segment_distance(p, a, b) -> float:
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def point_to_polyline_distance(p, pts: np.ndarray) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) == 1:
        return math.hypot(float(p[0]) - pts[0, 0], float(p[1]) - pts[0, 1])
    return min(point_segment_distance(p, pts[k], pts[k + 1]) for k in range(len(pts) - 1))
