"""Costmap and path rendering to PPM images and SVG drawings. Both outputs
draw y upward so they match the planar coordinate convention."""

from __future__ import annotations

import numpy as np

from .costmap import FREE, OCCUPIED, Costmap
from .errors import ContractViolation

_STATE_RGB = {
    0: (128, 128, 140),  # unknown
    1: (236, 236, 230),  # free
    2: (45, 45, 55),     # occupied
}
_PATH_RGB = (200, 40, 40)
_NODE_RGB = (120, 10, 10)
_GOAL_RGB = (30, 110, 200)


def _path_positions(planned) -> np.ndarray | None:
    if planned is None:
        return None
    return np.asarray(getattr(planned, "positions", planned), dtype=float).reshape(-1, 2)


def _stamp_disc(img: np.ndarray, px: float, py: float, r: float, color) -> None:
    h, w = img.shape[:2]
    x0, x1 = max(0, int(px - r - 1)), min(w - 1, int(px + r + 1))
    y0, y1 = max(0, int(py - r - 1)), min(h - 1, int(py + r + 1))
    if x0 > x1 or y0 > y1:
        return
    xs = np.arange(x0, x1 + 1)
    ys = np.arange(y0, y1 + 1)
    gx, gy = np.meshgrid(xs, ys)
    hit = (gx - px) ** 2 + (gy - py) ** 2 <= r * r
    img[y0 : y1 + 1, x0 : x1 + 1][hit] = color


def _stamp_segment(img: np.ndarray, a, b, r: float, color) -> None:
    ax, ay = a
    bx, by = b
    n = max(1, int(np.hypot(bx - ax, by - ay) / max(r, 0.5)) * 2)
    for t in np.linspace(0.0, 1.0, n + 1):
        _stamp_disc(img, ax + t * (bx - ax), ay + t * (by - ay), r, color)


def render_costmap_ppm(cmap: Costmap, planned=None, scale: int = 4,
                       provenance=()) -> bytes:
    """Upscaled raster of the costmap, path overlaid in red, goal node blue.
    Row zero of the image is the top, so the grid is vertically flipped.
    Provenance lines become header comments."""
    if scale < 1:
        raise ContractViolation("scale must be >= 1")
    lut = np.zeros((3, 3), dtype=np.uint8)
    for state, rgb in _STATE_RGB.items():
        lut[state] = rgb
    img = lut[cmap.cells]
    img = np.kron(img, np.ones((scale, scale, 1), dtype=np.uint8))
    pos = _path_positions(planned)
    if pos is not None and len(pos):
        pix = np.column_stack([
            (pos[:, 0] - cmap.origin.x) / cmap.resolution * scale,
            (pos[:, 1] - cmap.origin.y) / cmap.resolution * scale,
        ])
        for a, b in zip(pix[:-1], pix[1:]):
            _stamp_segment(img, a, b, 0.35 * scale, _PATH_RGB)
        for p in pix[:-1]:
            _stamp_disc(img, p[0], p[1], 0.45 * scale, _NODE_RGB)
        _stamp_disc(img, pix[-1, 0], pix[-1, 1], 0.7 * scale, _GOAL_RGB)
    img = img[::-1]  # y up
    h, w = img.shape[:2]
    comments = "".join(f"# {line}\n" for line in provenance).encode("ascii")
    return b"P6\n" + comments + b"%d %d\n255\n" % (w, h) + img.tobytes()


def render_costmap_svg(cmap: Costmap, planned=None, provenance=()) -> str:
    """Compact SVG: one rect per run of equal non-Free cells, a polyline for
    the path. Coordinates are in cell units with y pointing up. Provenance
    lines become leading XML comments."""
    w, h = cmap.width, cmap.height
    parts = [f"<!-- {line} -->" for line in provenance]
    parts += [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" '
        f'width="{4 * w}" height="{4 * h}">',
        f'<g transform="translate(0,{h}) scale(1,-1)">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="rgb{_STATE_RGB[FREE]}"/>',
    ]
    cells = cmap.cells
    for state, color in ((0, _STATE_RGB[0]), (OCCUPIED, _STATE_RGB[OCCUPIED])):
        if state == FREE:
            continue
        for j in range(h):
            row = cells[j]
            i = 0
            while i < w:
                if row[i] != state:
                    i += 1
                    continue
                k = i
                while k < w and row[k] == state:
                    k += 1
                parts.append(f'<rect x="{i}" y="{j}" width="{k - i}" height="1" fill="rgb{color}"/>')
                i = k
    pos = _path_positions(planned)
    if pos is not None and len(pos):
        pix = [(
            (x - cmap.origin.x) / cmap.resolution,
            (y - cmap.origin.y) / cmap.resolution,
        ) for x, y in pos]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in pix)
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="rgb{_PATH_RGB}" '
            'stroke-width="0.7" stroke-linejoin="round" stroke-linecap="round"/>'
        )
        gx, gy = pix[-1]
        parts.append(f'<circle cx="{gx:.2f}" cy="{gy:.2f}" r="1.4" fill="rgb{_GOAL_RGB}"/>')
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def save_render(path, cmap: Costmap, planned=None, scale: int = 4,
                provenance=()) -> None:
    """Write a .ppm or .svg render, chosen by the file extension."""
    name = str(path)
    if name.endswith(".svg"):
        with open(path, "w") as f:
            f.write(render_costmap_svg(cmap, planned, provenance=provenance))
    elif name.endswith(".ppm"):
        with open(path, "wb") as f:
            f.write(render_costmap_ppm(cmap, planned, scale=scale, provenance=provenance))
    else:
        raise ContractViolation("render output must end in .ppm or .svg")
