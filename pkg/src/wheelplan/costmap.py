"""Projected-body-frame costmap: Unknown/Free/Occupied grid built from a
labeled point cloud by convex-hull rasterization plus footprint morphology."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .camera import CameraModel
from .errors import ContractViolation, ParseError
from .geometry import Pose2D, convex_hull, rasterize_convex_polygon
from .scene import CLASS_DRIVABLE, CLASS_OBSTACLE, FRAME_BODY, FRAME_CAMERA, PointCloud

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

STATE_CHARS = "UFO"
CHAR_STATES = {"U": UNKNOWN, "F": FREE, "O": OCCUPIED}

DEFAULT_RESOLUTION = 0.1  # m per cell
DEFAULT_WIDTH = 100  # forward cells -> 10 m
DEFAULT_HEIGHT = 100  # lateral cells -> 10 m centered on the robot

# state-pair disagreement weights used by costmap_distance
_DIST_W = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 1.0], [0.5, 1.0, 0.0]])


@dataclass(frozen=True)
class RobotFootprint:
    """Rectangular footprint plus the safety radii applied to the map."""

    length: float = 1.0  # m
    width: float = 0.5  # m
    inflation_radius: float = 0.5  # m, dilates Occupied
    constriction_radius: float = 0.5  # m, erodes Free

    def __post_init__(self):
        if min(self.length, self.width) <= 0:
            raise ContractViolation("footprint extents must be positive")
        if self.inflation_radius < 0 or self.constriction_radius < 0:
            raise ContractViolation("radii must be >= 0")


@dataclass(frozen=True)
class Costmap:
    """Immutable occupancy grid.

    cells[j, i] covers x in [ox + i*res, ox + (i+1)*res) and
    y in [oy + j*res, oy + (j+1)*res); origin is the corner of cell (0, 0).
    """

    cells: np.ndarray
    resolution: float
    origin: Pose2D

    def __post_init__(self):
        arr = np.asarray(self.cells, dtype=np.uint8)
        if arr.ndim != 2 or arr.size == 0:
            raise ContractViolation("costmap cells must be a non-empty 2-D array")
        if arr.max(initial=0) > OCCUPIED:
            raise ContractViolation("cell states must be in {0, 1, 2}")
        if self.resolution <= 0:
            raise ContractViolation("resolution must be positive")
        object.__setattr__(self, "resolution", float(self.resolution))
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "cells", arr)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def free_mask(self) -> np.ndarray:
        return self.cells == FREE

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def cell_of(self, x: float, y: float) -> tuple[int, int] | None:
        ix = int(math.floor((x - self.origin.x) / self.resolution))
        iy = int(math.floor((y - self.origin.y) / self.resolution))
        return (ix, iy) if self.in_bounds(ix, iy) else None

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin.x + (ix + 0.5) * self.resolution,
            self.origin.y + (iy + 0.5) * self.resolution,
        )

    def state_at(self, x: float, y: float) -> int | None:
        c = self.cell_of(x, y)
        return None if c is None else int(self.cells[c[1], c[0]])

    def same_geometry(self, other: "Costmap") -> bool:
        return (
            self.cells.shape == other.cells.shape
            and abs(self.resolution - other.resolution) < 1e-12
            and abs(self.origin.x - other.origin.x) < 1e-9
            and abs(self.origin.y - other.origin.y) < 1e-9
        )


def is_traversable(cmap: Costmap, x: float, y: float) -> bool:
    """True when (x, y) falls on a Free cell; out-of-map points are not traversable."""
    return cmap.state_at(x, y) == FREE


def project_to_body(pc: PointCloud, cam: CameraModel) -> PointCloud:
    """Transform a camera-frame cloud through the extrinsics and drop z."""
    if pc.frame != FRAME_CAMERA:
        raise ContractViolation(f"expected a camera-frame cloud, got {pc.frame!r}")
    body = cam.cam_to_body(pc.points) if len(pc) else np.zeros((0, 3))
    return PointCloud(body[:, :2], pc.labels, FRAME_BODY)


def disc_offsets(radius_m: float, resolution: float) -> np.ndarray:
    """Boolean structuring element: lattice cells with center distance <= radius.

    The boundary belongs to the disc; a small epsilon keeps cells exactly on
    the radius included despite float division.
    """
    r_cells = int(math.floor(radius_m / resolution + 1e-9))
    rng = np.arange(-r_cells, r_cells + 1)
    dj, di = np.meshgrid(rng, rng, indexing="ij")
    return (di * resolution) ** 2 + (dj * resolution) ** 2 <= radius_m ** 2 + 1e-12


def rasterize_regions(
    pc: PointCloud,
    *,
    resolution: float = DEFAULT_RESOLUTION,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
    origin: Pose2D | None = None,
    single_hull: bool = False,
) -> tuple[np.ndarray, np.ndarray, Pose2D]:
    """Pre-morphology free/occupied masks.

    Free is the scanline fill of the convex hull of drivable points. Occupied
    is the union of per-cluster hulls of obstacle points (8-connected cell
    clusters), or one global hull with single_hull=True; obstacle points
    always mark their own cells so isolated returns are never lost. Fewer
    than 3 drivable points leaves the whole map Unknown.
    """
    if pc.frame != FRAME_BODY:
        raise ContractViolation("costmap construction needs a projected-body-frame cloud")
    if origin is None:
        origin = Pose2D(0.0, -height * resolution / 2.0, 0.0)
    shape = (height, width)
    free = np.zeros(shape, dtype=bool)
    occ = np.zeros(shape, dtype=bool)

    drivable = pc.points[pc.labels == CLASS_DRIVABLE]
    if len(drivable) < 3:
        return free, occ, origin
    hull = convex_hull(drivable)
    if len(hull) >= 3:
        free = rasterize_convex_polygon(hull, (origin.x, origin.y), resolution, shape)

    obstacle = pc.points[pc.labels == CLASS_OBSTACLE]
    if len(obstacle):
        ix = np.floor((obstacle[:, 0] - origin.x) / resolution).astype(int)
        iy = np.floor((obstacle[:, 1] - origin.y) / resolution).astype(int)
        inb = (ix >= 0) & (ix < width) & (iy >= 0) & (iy < height)
        obstacle, ix, iy = obstacle[inb], ix[inb], iy[inb]
    if len(obstacle):
        seed = np.zeros(shape, dtype=bool)
        seed[iy, ix] = True
        if single_hull:
            clusters = [np.ones(len(obstacle), dtype=bool)]
        else:
            lab, n_lab = ndimage.label(seed, structure=np.ones((3, 3), dtype=int))
            point_lab = lab[iy, ix]
            clusters = [point_lab == k for k in range(1, n_lab + 1)]
        occ |= seed
        for member in clusters:
            pts = obstacle[member]
            hull = convex_hull(pts)
            if len(hull) >= 3:
                occ |= rasterize_convex_polygon(hull, (origin.x, origin.y), resolution, shape)
    return free, occ, origin


def apply_footprint_morphology(
    free: np.ndarray, occ: np.ndarray, footprint: RobotFootprint, resolution: float
) -> tuple[np.ndarray, np.ndarray]:
    """Erode Free by the constriction disc, dilate Occupied by the inflation disc.

    Eroded cells fall back to Unknown; out-of-map neighborhoods count as
    non-Free, so the free region also shrinks at the map border. Occupied
    always wins over Free in the final composition.
    """
    if footprint.constriction_radius > 0:
        free = ndimage.binary_erosion(
            free, structure=disc_offsets(footprint.constriction_radius, resolution), border_value=0
        )
    if footprint.inflation_radius > 0 and occ.any():
        occ = ndimage.binary_dilation(
            occ, structure=disc_offsets(footprint.inflation_radius, resolution)
        )
    return free, occ


def build_costmap(
    pc: PointCloud,
    footprint: RobotFootprint = RobotFootprint(),
    *,
    resolution: float = DEFAULT_RESOLUTION,
    width: int = DEFAULT_WIDTH,
    height: int = DEFAULT_HEIGHT,
    origin: Pose2D | None = None,
    single_hull: bool = False,
) -> Costmap:
    """Build the projected-body-frame costmap from a labeled 2-D cloud.

    Pipeline: start Unknown; fill the drivable hull as Free; fill obstacle
    cluster hulls as Occupied; erode Free by the constriction radius; dilate
    Occupied by the inflation radius; Occupied overrides Free. Unknown cells
    never become Free through morphology.
    """
    free, occ, origin = rasterize_regions(
        pc, resolution=resolution, width=width, height=height, origin=origin, single_hull=single_hull
    )
    free, occ = apply_footprint_morphology(free, occ, footprint, resolution)
    cells = np.full(free.shape, UNKNOWN, dtype=np.uint8)
    cells[free] = FREE
    cells[occ] = OCCUPIED
    return Costmap(cells, resolution, origin)


def costmap_distance(a: Costmap, b: Costmap) -> float:
    """Mean per-cell disagreement: 0 equal states, 1 Free/Occupied conflict,
    0.5 when exactly one side is Unknown."""
    if not a.same_geometry(b):
        raise ContractViolation("costmap_distance requires identical geometry")
    return float(np.mean(_DIST_W[a.cells, b.cells]))


def costmap_to_text(cmap: Costmap, provenance: list[str] | None = None) -> str:
    lines = [f"# {p}" for p in (provenance or [])]
    lines.append(
        f"costmap {cmap.width} {cmap.height} {cmap.resolution!r} "
        f"{cmap.origin.x!r} {cmap.origin.y!r} {cmap.origin.theta!r}"
    )
    chars = np.array(list(STATE_CHARS))
    for j in range(cmap.height):
        lines.append("".join(chars[cmap.cells[j]]))
    return "\n".join(lines) + "\n"


def costmap_from_text(text: str) -> Costmap:
    """Parse the text format; `#` comment lines before the header are skipped."""
    offset = 0
    header = None
    rows: list[str] = []
    for raw in text.splitlines(keepends=True):
        line = raw.strip()
        if line.startswith("#") or (not line and header is None):
            offset += len(raw)
            continue
        if header is None:
            header = line
            parts = line.split()
            if len(parts) != 7 or parts[0] != "costmap":
                raise ParseError("malformed costmap header", offset)
            try:
                w, h = int(parts[1]), int(parts[2])
                res, ox, oy, oth = (float(p) for p in parts[3:])
            except ValueError:
                raise ParseError("malformed costmap header values", offset) from None
            if w <= 0 or h <= 0 or res <= 0:
                raise ParseError("non-positive costmap dimensions", offset)
            offset += len(raw)
            continue
        if line:
            rows.append(line)
            if len(line) != w:
                raise ParseError(f"row width {len(line)} != {w}", offset)
            for ch in line:
                if ch not in CHAR_STATES:
                    raise ParseError(f"unknown cell state {ch!r}", offset + line.index(ch))
        offset += len(raw)
    if header is None:
        raise ParseError("missing costmap header", 0)
    if len(rows) != h:
        raise ParseError(f"expected {h} rows, found {len(rows)}", offset)
    cells = np.array([[CHAR_STATES[c] for c in row] for row in rows], dtype=np.uint8)
    return Costmap(cells, res, Pose2D(ox, oy, oth))


def save_costmap(path, cmap: Costmap, provenance: list[str] | None = None) -> None:
    with open(path, "w") as f:
        f.write(costmap_to_text(cmap, provenance))


def load_costmap(path) -> Costmap:
    with open(path) as f:
        return costmap_from_text(f.read())
