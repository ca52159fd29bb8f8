"""Geometry primitives: hulls, polylines, rasterization.

Hand-checkable shapes only. The square hull, the 3-4-5 point-segment
distance, and the unit-square rasterization all have closed-form answers.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from wheelplan.geometry import (
    Pose2D,
    convex_hull,
    cumulative_lengths,
    densify_polyline,
    point_along_polyline,
    point_in_convex_polygon,
    point_segment_distance,
    point_to_polyline_distance,
    polyline_length,
    rasterize_convex_polygon,
    wrap_angle,
)


def test_wrap_angle_range():
    for a in np.linspace(-10.0, 10.0, 201):
        w = wrap_angle(float(a))
        assert -math.pi < w <= math.pi
        # same direction modulo 2*pi
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)


def test_wrap_angle_pi_maps_to_pi():
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)


def test_pose2d_normalizes_theta():
    p = Pose2D(0.0, 0.0, 3 * math.pi)
    assert -math.pi < p.theta <= math.pi


def test_convex_hull_square_with_interior_points():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.25, 0.75]], dtype=float)
    hull = convex_hull(pts)
    assert len(hull) == 4
    assert {tuple(p) for p in hull} == {(0, 0), (1, 0), (1, 1), (0, 1)}


def test_convex_hull_collinear_points():
    pts = np.array([[0, 0], [1, 1], [2, 2], [0.5, 0.5]], dtype=float)
    hull = convex_hull(pts)
    # degenerate hull keeps the extreme points
    assert len(hull) <= 3
    assert (0, 0) in {tuple(p) for p in hull}
    assert (2, 2) in {tuple(p) for p in hull}


def test_point_in_convex_polygon():
    sq = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], dtype=float)
    assert point_in_convex_polygon((1.0, 1.0), sq)
    assert point_in_convex_polygon((0.0, 0.0), sq)  # vertex counts as inside
    assert point_in_convex_polygon((1.0, 0.0), sq)  # edge counts as inside
    assert not point_in_convex_polygon((2.1, 1.0), sq)
    assert not point_in_convex_polygon((-0.001, 1.0), sq)


def test_point_segment_distance_345():
    # foot of the perpendicular from (3,4) onto the x axis is (3,0)
    assert point_segment_distance((3.0, 4.0), (0.0, 0.0), (10.0, 0.0)) == pytest.approx(4.0)
    # beyond the end, distance is to the endpoint
    assert point_segment_distance((13.0, 4.0), (0.0, 0.0), (10.0, 0.0)) == pytest.approx(5.0)
    # degenerate segment is a point
    assert point_segment_distance((3.0, 4.0), (0.0, 0.0), (0.0, 0.0)) == pytest.approx(5.0)


def test_polyline_length_and_cumulative():
    pts = np.array([[0, 0], [1, 0], [1, 1.5]], dtype=float)
    assert polyline_length(pts) == pytest.approx(2.5)
    cum = cumulative_lengths(pts)
    assert cum.tolist() == pytest.approx([0.0, 1.0, 2.5])


def test_point_along_polyline_hits_corner():
    pts = np.array([[0, 0], [1, 0], [1, 1.5]], dtype=float)
    cum = cumulative_lengths(pts)
    np.testing.assert_allclose(point_along_polyline(pts, cum, 1.0), [1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(point_along_polyline(pts, cum, 0.5), [0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(point_along_polyline(pts, cum, 2.5), [1.0, 1.5], atol=1e-12)
    # clamped beyond the ends
    np.testing.assert_allclose(point_along_polyline(pts, cum, 99.0), [1.0, 1.5], atol=1e-12)


def test_densify_polyline_spacing_bound():
    pts = np.array([[0, 0], [5, 0], [5, 3]], dtype=float)
    dense = densify_polyline(pts, 0.9)
    seg = np.linalg.norm(np.diff(dense, axis=0), axis=1)
    assert np.all(seg <= 0.9 + 1e-12)
    # endpoints and total length preserved
    np.testing.assert_allclose(dense[0], pts[0])
    np.testing.assert_allclose(dense[-1], pts[-1])
    assert polyline_length(dense) == pytest.approx(8.0)


def test_point_to_polyline_distance():
    pts = np.array([[0, 0], [10, 0]], dtype=float)
    assert point_to_polyline_distance((5.0, 2.0), pts) == pytest.approx(2.0)
    assert point_to_polyline_distance((5.0, 0.0), pts) == pytest.approx(0.0)


def test_rasterize_unit_square_cell_center_rule():
    # square [0,1]x[0,1] on a 0.1 m grid: cell centers at 0.05..0.95 fall
    # inside for indices 0..9, so exactly a 10x10 block is filled
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    mask = rasterize_convex_polygon(sq, (0.0, 0.0), 0.1, (20, 20))
    assert mask.sum() == 100
    assert mask[:10, :10].all()
    assert not mask[10:, :].any()
    assert not mask[:, 10:].any()


def test_rasterize_clips_to_grid():
    sq = np.array([[-5, -5], [5, -5], [5, 5], [-5, 5]], dtype=float)
    mask = rasterize_convex_polygon(sq, (0.0, 0.0), 0.1, (20, 20))
    assert mask.all()
