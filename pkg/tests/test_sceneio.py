"""File formats: 16-bit depth graymaps, semantic graymaps, masks, camera text.

Depth quantization: values are stored as round(depth/scale) in a 16-bit
channel, so a round trip is exact for multiples of the scale and within
scale/2 otherwise. The working resolution is 224x320; larger inputs are
downsampled on load, smaller ones rejected.
"""

from __future__ import annotations

import numpy as np
import pytest

from wheelplan.camera import default_camera
from wheelplan.errors import ParseError
from wheelplan.sceneio import (
    load_camera,
    load_depth,
    load_mask,
    load_semantic,
    save_camera,
    save_depth,
    save_mask,
    save_semantic,
)
from wheelplan.scene import DepthImage, SemanticImage

W, H = 320, 224


def test_depth_roundtrip_exact_on_scale_multiples(tmp_path):
    vals = np.round(np.random.default_rng(0).uniform(0, 10, (H, W)), 3)
    p = tmp_path / "d.pgm"
    save_depth(p, DepthImage(vals))
    np.testing.assert_allclose(load_depth(p).data, vals, atol=5e-4)


def test_depth_value_2500_is_2_5_m(tmp_path):
    raw = b"P5\n# depth-scale 0.001\n320 224\n65535\n" + \
        np.full((H, W), 2500, dtype=">u2").tobytes()
    p = tmp_path / "d.pgm"
    p.write_bytes(raw)
    d = load_depth(p)
    assert float(d.data[0, 0]) == pytest.approx(2.5)
    assert float(d.data.max()) == pytest.approx(2.5)


def test_depth_custom_scale(tmp_path):
    p = tmp_path / "d.pgm"
    save_depth(p, DepthImage(np.full((H, W), 4.0)), scale=0.002)
    assert b"depth-scale 0.002" in p.read_bytes()[:64]
    assert float(load_depth(p).data[0, 0]) == pytest.approx(4.0)


def test_depth_downsample_2x(tmp_path):
    raw = b"P5\n# depth-scale 0.001\n640 448\n65535\n" + \
        np.full((448, 640), 2500, dtype=">u2").tobytes()
    p = tmp_path / "big.pgm"
    p.write_bytes(raw)
    d = load_depth(p)
    assert d.data.shape == (H, W)
    assert float(d.data[10, 10]) == pytest.approx(2.5)


def test_depth_below_working_resolution_rejected(tmp_path):
    raw = b"P5\n# depth-scale 0.001\n160 112\n65535\n" + \
        np.full((112, 160), 100, dtype=">u2").tobytes()
    p = tmp_path / "small.pgm"
    p.write_bytes(raw)
    with pytest.raises(ParseError):
        load_depth(p)


def test_depth_truncated_payload_rejected(tmp_path):
    raw = b"P5\n# depth-scale 0.001\n320 224\n65535\n" + b"\x00" * 100
    p = tmp_path / "trunc.pgm"
    p.write_bytes(raw)
    with pytest.raises(ParseError) as e:
        load_depth(p)
    assert e.value.offset is not None


def test_semantic_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    sem = rng.integers(0, 3, (H, W)).astype(np.uint8)
    p = tmp_path / "s.pgm"
    save_semantic(p, SemanticImage(sem))
    np.testing.assert_array_equal(load_semantic(p).data, sem)


def test_semantic_code_3_rejected(tmp_path):
    raw = b"P5\n320 224\n255\n" + np.full((H, W), 3, dtype=np.uint8).tobytes()
    p = tmp_path / "bad.pgm"
    p.write_bytes(raw)
    with pytest.raises(ParseError) as e:
        load_semantic(p)
    assert "3" in str(e.value)


def test_semantic_downsample_nearest(tmp_path):
    # 2x2 blocks of a single class survive nearest-neighbor decimation
    sem = np.zeros((448, 640), dtype=np.uint8)
    sem[:, 320:] = 2
    raw = b"P5\n640 448\n255\n" + sem.tobytes()
    p = tmp_path / "big.pgm"
    p.write_bytes(raw)
    s = load_semantic(p)
    assert s.data.shape == (H, W)
    assert set(np.unique(s.data)) <= {0, 2}
    assert s.data[0, 0] == 0 and s.data[0, W - 1] == 2


def test_mask_roundtrip(tmp_path):
    mask = np.zeros((H, W), dtype=bool)
    mask[50:60, 100:200] = True
    p = tmp_path / "m.pgm"
    save_mask(p, mask)
    back = load_mask(p)
    assert back.dtype == bool
    np.testing.assert_array_equal(back, mask)


def test_camera_roundtrip(tmp_path):
    cam = default_camera()
    p = tmp_path / "cam.txt"
    save_camera(p, cam)
    back = load_camera(p)
    assert back.fx == cam.fx and back.fy == cam.fy
    assert back.cx == cam.cx and back.cy == cam.cy
    assert (back.width, back.height) == (cam.width, cam.height)
    assert back.hfov == cam.hfov and back.max_range == cam.max_range
    np.testing.assert_allclose(back.rotation, cam.rotation, atol=1e-15)
    np.testing.assert_allclose(back.translation, cam.translation, atol=1e-15)


def test_camera_missing_key_rejected(tmp_path):
    p = tmp_path / "cam.txt"
    p.write_text("fx=100\nfy=100\n")
    with pytest.raises(ParseError):
        load_camera(p)


def test_camera_malformed_line_rejected(tmp_path):
    cam = default_camera()
    p = tmp_path / "cam.txt"
    save_camera(p, cam)
    p.write_text(p.read_text() + "not a key value line\n")
    with pytest.raises(ParseError):
        load_camera(p)
