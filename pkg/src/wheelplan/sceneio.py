"""File formats: binary PGM depth (16-bit big-endian) and semantic images,
binary masks, PPM color images, and the flat key=value camera config.

Loads enforce the working resolution: matching images pass through, larger
ones are downsampled (depth by valid-aware block mean when the ratio is an
integer, nearest otherwise; semantics always nearest), smaller ones are
rejected. Parse failures report a byte offset.
"""

from __future__ import annotations

import math

import numpy as np

from .camera import WORKING_HEIGHT, WORKING_WIDTH, CameraModel
from .errors import ContractViolation, ParseError
from .scene import DepthImage, SemanticImage

DEFAULT_DEPTH_SCALE = 0.001  # meters per stored unit

_WS = b" \t\r\n"


class _Cursor:
    """Byte scanner over a PNM header that remembers comment lines."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.comments: list[str] = []

    def _skip_space(self, collect_comments: bool = True) -> None:
        d = self.data
        while self.pos < len(d):
            c = d[self.pos : self.pos + 1]
            if c in (b" ", b"\t", b"\r", b"\n"):
                self.pos += 1
            elif c == b"#" and collect_comments:
                end = d.find(b"\n", self.pos)
                end = len(d) if end < 0 else end
                self.comments.append(d[self.pos + 1 : end].decode("latin-1").strip())
                self.pos = end
            else:
                return

    def token(self) -> tuple[bytes, int]:
        self._skip_space()
        start = self.pos
        d = self.data
        while self.pos < len(d) and d[self.pos : self.pos + 1] not in (b" ", b"\t", b"\r", b"\n", b"#"):
            self.pos += 1
        if self.pos == start:
            raise ParseError("unexpected end of header", start)
        return d[start : self.pos], start

    def int_token(self, what: str) -> int:
        tok, off = self.token()
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"invalid {what} {tok!r}", off) from None


def _read_pnm(path, magics: tuple[bytes, ...]):
    with open(path, "rb") as f:
        data = f.read()
    cur = _Cursor(data)
    magic, off = cur.token()
    if magic not in magics:
        raise ParseError(f"unsupported magic {magic!r}", off)
    width = cur.int_token("width")
    height = cur.int_token("height")
    maxval = cur.int_token("maxval")
    if width < 1 or height < 1:
        raise ParseError(f"bad dimensions {width}x{height}", off)
    if not (0 < maxval < 65536):
        raise ParseError(f"bad maxval {maxval}", off)
    # exactly one whitespace byte separates the header from the raster
    if cur.pos >= len(data) or data[cur.pos : cur.pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
        raise ParseError("missing raster separator", cur.pos)
    cur.pos += 1
    channels = 3 if magic == b"P6" else 1
    wide = maxval > 255
    need = width * height * channels * (2 if wide else 1)
    raster = data[cur.pos : cur.pos + need]
    if len(raster) < need:
        raise ParseError(f"truncated raster: need {need} bytes, have {len(raster)}", len(data))
    arr = np.frombuffer(raster, dtype=">u2" if wide else np.uint8)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return arr.reshape(shape), maxval, cur.pos, cur.comments


def _header(magic: bytes, width: int, height: int, maxval: int, comments) -> bytes:
    lines = [magic]
    for c in comments:
        lines.append(b"# " + str(c).encode("latin-1"))
    lines.append(f"{width} {height}".encode())
    lines.append(str(maxval).encode())
    return b"\n".join(lines) + b"\n"


def _check_working_shape(shape: tuple[int, int], raster_offset: int) -> tuple[int, int] | None:
    """None when the image already matches; (sy, sx) source shape otherwise.
    Smaller than working size in either dimension is an error."""
    h, w = shape
    if (h, w) == (WORKING_HEIGHT, WORKING_WIDTH):
        return None
    if h < WORKING_HEIGHT or w < WORKING_WIDTH:
        raise ParseError(
            f"image {w}x{h} is below the working resolution {WORKING_WIDTH}x{WORKING_HEIGHT}",
            raster_offset,
        )
    return (h, w)


def _nearest_indices(n_out: int, n_in: int) -> np.ndarray:
    return np.minimum((np.arange(n_out) + 0.5) * n_in // n_out, n_in - 1).astype(int)


def _downsample_depth(meters: np.ndarray) -> np.ndarray:
    h, w = meters.shape
    if h % WORKING_HEIGHT == 0 and w % WORKING_WIDTH == 0:
        fy, fx = h // WORKING_HEIGHT, w // WORKING_WIDTH
        blocks = meters.reshape(WORKING_HEIGHT, fy, WORKING_WIDTH, fx)
        valid = blocks > 0
        counts = valid.sum(axis=(1, 3))
        sums = np.where(valid, blocks, 0.0).sum(axis=(1, 3))
        out = np.zeros((WORKING_HEIGHT, WORKING_WIDTH))
        np.divide(sums, counts, out=out, where=counts > 0)
        return out
    ri = _nearest_indices(WORKING_HEIGHT, h)
    ci = _nearest_indices(WORKING_WIDTH, w)
    return meters[np.ix_(ri, ci)]


def _downsample_nearest(arr: np.ndarray) -> np.ndarray:
    ri = _nearest_indices(WORKING_HEIGHT, arr.shape[0])
    ci = _nearest_indices(WORKING_WIDTH, arr.shape[1])
    return arr[np.ix_(ri, ci)]


def save_depth(path, depth: DepthImage, scale: float = DEFAULT_DEPTH_SCALE,
               provenance: list[str] | None = None) -> None:
    if scale <= 0:
        raise ContractViolation("depth scale must be positive")
    units = np.clip(np.rint(depth.data / scale), 0, 65535).astype(">u2")
    comments = [f"depth-scale {scale!r}", *(provenance or [])]
    h, w = depth.data.shape
    with open(path, "wb") as f:
        f.write(_header(b"P5", w, h, 65535, comments))
        f.write(units.tobytes())


def load_depth(path) -> DepthImage:
    arr, maxval, raster_off, comments = _read_pnm(path, (b"P5",))
    if maxval <= 255:
        raise ParseError(f"depth image must be 16-bit, got maxval {maxval}", raster_off)
    scale = DEFAULT_DEPTH_SCALE
    for c in comments:
        parts = c.split()
        if len(parts) == 2 and parts[0] == "depth-scale":
            try:
                scale = float(parts[1])
            except ValueError:
                raise ParseError(f"bad depth-scale comment {c!r}", 0) from None
    meters = arr.astype(np.float64) * scale
    if _check_working_shape(meters.shape, raster_off) is not None:
        meters = _downsample_depth(meters)
    return DepthImage(meters)


def save_semantic(path, sem: SemanticImage, provenance: list[str] | None = None) -> None:
    h, w = sem.data.shape
    with open(path, "wb") as f:
        f.write(_header(b"P5", w, h, 255, provenance or []))
        f.write(sem.data.astype(np.uint8).tobytes())


def load_semantic(path) -> SemanticImage:
    arr, maxval, raster_off, _ = _read_pnm(path, (b"P5",))
    if maxval > 255:
        raise ParseError(f"semantic image must be 8-bit, got maxval {maxval}", raster_off)
    bad = np.nonzero(arr.ravel() > 2)[0]
    if len(bad):
        idx = int(bad[0])
        raise ParseError(
            f"invalid semantic code {int(arr.ravel()[idx])}", raster_off + idx
        )
    if _check_working_shape(arr.shape, raster_off) is not None:
        arr = _downsample_nearest(arr)
    return SemanticImage(arr.astype(np.uint8))


def save_mask(path, mask: np.ndarray, provenance: list[str] | None = None) -> None:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ContractViolation("mask must be 2-D")
    data = np.where(m.astype(bool), 255, 0).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(_header(b"P5", w, h, 255, provenance or []))
        f.write(data.tobytes())


def load_mask(path) -> np.ndarray:
    arr, maxval, raster_off, _ = _read_pnm(path, (b"P5",))
    if maxval > 255:
        raise ParseError(f"mask must be 8-bit, got maxval {maxval}", raster_off)
    flat = arr.ravel()
    bad = np.nonzero((flat != 0) & (flat != 255))[0]
    if len(bad):
        idx = int(bad[0])
        raise ParseError(f"mask byte {int(flat[idx])} is neither 0 nor 255", raster_off + idx)
    return arr > 0


def save_ppm(path, rgb: np.ndarray, provenance: list[str] | None = None) -> None:
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ContractViolation("rgb image must be HxWx3")
    h, w = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(_header(b"P6", w, h, 255, provenance or []))
        f.write(arr.astype(np.uint8).tobytes())


def load_ppm(path) -> np.ndarray:
    arr, maxval, raster_off, _ = _read_pnm(path, (b"P6",))
    if maxval > 255:
        raise ParseError(f"color image must be 8-bit, got maxval {maxval}", raster_off)
    return arr.astype(np.uint8)


_CAMERA_KEYS = (
    "fx", "fy", "cx", "cy", "width", "height", "hfov_deg", "max_range_m",
    "extrinsic_rotation", "extrinsic_translation",
)


def save_camera(path, cam: CameraModel, provenance: list[str] | None = None) -> None:
    rot = " ".join(repr(float(v)) for v in np.asarray(cam.rotation).ravel())
    trans = " ".join(repr(float(v)) for v in np.asarray(cam.translation).ravel())
    lines = [f"# {p}" for p in (provenance or [])]
    lines += [
        f"fx={cam.fx!r}",
        f"fy={cam.fy!r}",
        f"cx={cam.cx!r}",
        f"cy={cam.cy!r}",
        f"width={cam.width}",
        f"height={cam.height}",
        f"hfov_deg={math.degrees(cam.hfov)!r}",
        f"max_range_m={cam.max_range!r}",
        f"extrinsic_rotation={rot}",
        f"extrinsic_translation={trans}",
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def load_camera(path) -> CameraModel:
    values: dict[str, str] = {}
    offset = 0
    with open(path, "rb") as f:
        raw = f.read()
    for line in raw.split(b"\n"):
        text = line.decode("latin-1").strip()
        if text and not text.startswith("#"):
            if "=" not in text:
                raise ParseError(f"expected key=value, got {text!r}", offset)
            key, _, val = text.partition("=")
            key = key.strip()
            if key not in _CAMERA_KEYS:
                raise ParseError(f"unknown camera key {key!r}", offset)
            if key in values:
                raise ParseError(f"duplicate camera key {key!r}", offset)
            values[key] = val.strip()
        offset += len(line) + 1
    missing = [k for k in _CAMERA_KEYS if k not in values]
    if missing:
        raise ParseError(f"missing camera keys: {', '.join(missing)}", len(raw))

    def fval(key: str) -> float:
        try:
            return float(values[key])
        except ValueError:
            raise ParseError(f"bad float for {key!r}: {values[key]!r}", 0) from None

    rot_parts = values["extrinsic_rotation"].split()
    trans_parts = values["extrinsic_translation"].split()
    if len(rot_parts) != 9:
        raise ParseError("extrinsic_rotation needs 9 floats", 0)
    if len(trans_parts) != 3:
        raise ParseError("extrinsic_translation needs 3 floats", 0)
    try:
        rot = np.array([float(v) for v in rot_parts]).reshape(3, 3)
        trans = np.array([float(v) for v in trans_parts])
    except ValueError:
        raise ParseError("non-numeric extrinsic value", 0) from None
    return CameraModel(
        fx=fval("fx"),
        fy=fval("fy"),
        cx=fval("cx"),
        cy=fval("cy"),
        width=int(fval("width")),
        height=int(fval("height")),
        hfov=math.radians(fval("hfov_deg")),
        max_range=fval("max_range_m"),
        rotation=rot,
        translation=trans,
    )
