"""Success checking, the 25-term turning cost, suite tables and D-binning.

Turning-cost convention: theta_1 compares the first segment against the
initial heading (+x of the projected body frame unless overridden), theta_25
compares the last segment against the goal orientation, and the 23 interior
angles sit between segment pairs. The sum is normalized by 25 * 90 deg.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from wheelplan import (
    ContractViolation,
    Costmap,
    FREE,
    OCCUPIED,
    PlannedPath,
    Pose2D,
)
from wheelplan.evaluation import (
    EvalRecord,
    bin_by_quality,
    check_success,
    evaluate_suite,
    format_table,
    sr_trend_slope,
    turning_cost,
    write_suite_csv,
)

from oracles import turning_cost_oracle


def free_map(w: int = 60, h: int = 40) -> Costmap:
    return Costmap(np.full((h, w), FREE, dtype=np.uint8), 0.1, Pose2D(0.0, 0.0, 0.0))


def path_from_dirs(dirs, step: float = 0.1, start=(0.25, 0.25)) -> list[tuple[float, float]]:
    pts = [start]
    for d in dirs:
        x, y = pts[-1]
        pts.append((x + step * math.cos(d), y + step * math.sin(d)))
    return pts


# -------------------------------------------------------------- check_success


def test_check_success_straight_path():
    cm = free_map()
    xs = np.linspace(0.25, 2.65, 25)
    path = PlannedPath(tuple((float(x), 1.05) for x in xs), 0.0)
    assert check_success(path, cm, Pose2D(2.65, 1.05, 0.0)) == (True, "ok")


def test_check_success_grazing_segment_collides():
    cm = free_map()
    cells = cm.cells.copy()
    cells[10, 10] = OCCUPIED  # cell [1.0,1.1) x [1.0,1.1)
    cm = Costmap(cells, 0.1, Pose2D(0.0, 0.0, 0.0))
    # nodes stay on Free cells; the chord between two of them clips the
    # occupied cell, so only a supersampled segment check can catch it
    pts = [(0.95 - 0.1 * k, 0.95) for k in range(23)][::-1] + [(1.15, 1.15)]
    pts.append((1.25, 1.25))
    path = PlannedPath(tuple(pts), 0.0)
    ok, reason = check_success(path, cm, Pose2D(1.25, 1.25, 0.0))
    assert (ok, reason) == (False, "collision")


def test_check_success_goal_missed():
    cm = free_map()
    xs = np.linspace(0.25, 2.65, 25)
    path = PlannedPath(tuple((float(x), 1.05) for x in xs), 0.0)
    ok, reason = check_success(path, cm, Pose2D(3.15, 1.05, 0.0))
    assert (ok, reason) == (False, "goal_missed")


def test_check_success_tol_is_euclidean():
    cm = free_map()
    xs = np.linspace(0.25, 2.65, 25)
    path = PlannedPath(tuple((float(x), 1.05) for x in xs), 0.0)
    assert check_success(path, cm, Pose2D(2.65, 1.24, 0.0))[0]
    assert not check_success(path, cm, Pose2D(2.65, 1.26, 0.0))[0]


# --------------------------------------------------------------- turning_cost


def test_turning_cost_straight_is_zero():
    xs = np.linspace(0.25, 2.65, 25)
    path = PlannedPath(tuple((float(x), 0.45) for x in xs), 0.0)
    assert turning_cost(path) == 0.0


def test_turning_cost_single_right_angle():
    # 12 segments along +x, then 12 along +y; endpoints aligned with the
    # initial heading and the goal theta, so the single interior 90 deg
    # turn is the only nonzero term: 90/(25*90)
    pts = path_from_dirs([0.0] * 12 + [math.pi / 2] * 12)
    path = PlannedPath(tuple(pts), math.pi / 2)
    assert abs(turning_cost(path) - 0.04) <= 1e-15


def test_turning_cost_staircase():
    # ten alternating 45 deg direction changes: 450/(25*90) = 0.2
    dirs = [0.0] * 4
    for k in range(10):
        dirs.extend([math.pi / 4 if k % 2 == 0 else 0.0] * 2)
    assert len(dirs) == 24
    pts = path_from_dirs(dirs)
    path = PlannedPath(tuple(pts), 0.0)
    assert abs(turning_cost(path) - 0.2) <= 1e-12


def test_turning_cost_duplicate_nodes_contribute_nothing():
    xs = list(np.linspace(0.25, 2.45, 23))
    pts = [(x, 0.45) for x in xs]
    pts = [pts[0], pts[0]] + pts[1:] + [pts[-1]]  # duplicated ends, 25 nodes
    path = PlannedPath(tuple(pts[:25]), 0.0)
    assert turning_cost(path) == 0.0


def test_turning_cost_matches_oracle_on_random_paths():
    rng = np.random.default_rng(17)
    for _ in range(20):
        dirs = rng.uniform(-math.pi / 3, math.pi / 3, 24)
        pts = path_from_dirs(dirs, start=(2.0, 2.0))
        gt = float(rng.uniform(-math.pi, math.pi))
        h0 = float(rng.uniform(-math.pi, math.pi))
        path = PlannedPath(tuple(pts), gt)
        ours = turning_cost(path, initial_heading=h0)
        ref = turning_cost_oracle(pts, gt, initial_heading=h0)
        assert abs(ours - ref) <= 1e-12


def test_turning_cost_rotation_invariance():
    rng = np.random.default_rng(23)
    dirs = rng.uniform(-math.pi / 4, math.pi / 4, 24)
    pts = path_from_dirs(dirs, start=(1.0, 1.0))
    base = turning_cost(PlannedPath(tuple(pts), 0.3), initial_heading=0.1)
    for alpha in rng.uniform(-math.pi, math.pi, 25):
        c, s = math.cos(alpha), math.sin(alpha)
        rot = [(c * x - s * y, s * x + c * y) for x, y in pts]
        tc = turning_cost(PlannedPath(tuple(rot), 0.3 + alpha), initial_heading=0.1 + alpha)
        assert abs(tc - base) <= 1e-12


# ------------------------------------------------------------------ suite


def rec(planner="astar", success=True, reason="", tc=0.1, quality=0.0, sample="s"):
    return EvalRecord(planner=planner, success=success, reason=reason, tc=tc,
                      quality=quality, cost_m=1.0, sample=sample)


def test_eval_record_invariants():
    with pytest.raises(ContractViolation):
        rec(success=True, reason="collision")
    with pytest.raises(ContractViolation):
        rec(tc=-0.01)
    with pytest.raises(ContractViolation):
        rec(quality=1.5)
    with pytest.raises(ContractViolation):
        rec(quality=-0.2)


def test_evaluate_suite_ratio():
    recs = [rec(success=i < 7, reason="" if i < 7 else "collision", sample=str(i))
            for i in range(10)]
    rows = evaluate_suite(recs)
    assert rows == [{"planner": "astar", "n": 10, "sr": 70.0, "mean_tc": 0.1}]


def test_evaluate_suite_mean_tc_over_successes_only():
    recs = [rec(tc=0.1, sample="a"), rec(tc=0.3, sample="b"),
            rec(success=False, reason="no_path", tc=None, sample="c")]
    (row,) = evaluate_suite(recs)
    assert row["n"] == 3
    assert abs(row["mean_tc"] - 0.2) < 1e-12


def test_evaluate_suite_zero_samples_explicit_row():
    rows = evaluate_suite([], planners=["astar"])
    assert rows == [{"planner": "astar", "n": 0, "sr": None, "mean_tc": None}]


def test_evaluate_suite_identical_rows_for_identical_planners():
    recs = [rec(planner="astar", sample="a"), rec(planner="jps", sample="a"),
            rec(planner="astar", success=False, reason="collision", sample="b"),
            rec(planner="jps", success=False, reason="collision", sample="b")]
    rows = evaluate_suite(recs)
    assert len(rows) == 2
    a, j = rows
    assert a["planner"] == "astar" and j["planner"] == "jps"
    assert {k: v for k, v in a.items() if k != "planner"} == \
           {k: v for k, v in j.items() if k != "planner"}


def test_format_table_is_aligned_text():
    out = format_table(evaluate_suite([rec()]))
    lines = out.splitlines()
    assert lines[0].split() == ["planner", "n", "SR%", "meanTC"]
    assert "astar" in lines[2]


def test_write_suite_csv_columns(tmp_path):
    p = tmp_path / "suite.csv"
    write_suite_csv(p, evaluate_suite([rec()]))
    lines = p.read_text().splitlines()
    assert lines[0] == "planner,n,SR_percent,mean_TC"
    assert lines[1].startswith("astar,1,100.0,")


# ------------------------------------------------------------------ binning


def test_bin_by_quality_degenerate_range():
    recs = [rec(quality=0.0, success=i < 7, reason="" if i < 7 else "no_path",
                sample=str(i)) for i in range(10)]
    bins = bin_by_quality(recs, n_bins=6)
    assert len(bins) == 1
    assert bins[0]["n"] == 10 and bins[0]["sr"] == 70.0


def test_bin_by_quality_equal_width_edges():
    recs = [rec(quality=q, sample=str(i))
            for i, q in enumerate(np.linspace(0.0, 0.6, 61))]
    bins = bin_by_quality(recs, n_bins=6)
    assert len(bins) == 6
    for k, b in enumerate(bins):
        assert abs(b["lo"] - 0.1 * k) < 1e-12
        assert abs(b["hi"] - 0.1 * (k + 1)) < 1e-12
    assert sum(b["n"] for b in bins) == 61


def test_bin_by_quality_empty_bins_reported():
    recs = [rec(quality=0.0, sample="a"), rec(quality=0.6, sample="b")]
    bins = bin_by_quality(recs, n_bins=6)
    assert len(bins) == 6
    assert bins[0]["n"] == 1 and bins[-1]["n"] == 1
    assert all(b["n"] == 0 for b in bins[1:-1])


def test_sr_trend_slope_signs():
    down = [{"lo": 0.1 * k, "hi": 0.1 * (k + 1), "n": 5, "sr": 100.0 - 15.0 * k}
            for k in range(6)]
    up = [{"lo": 0.1 * k, "hi": 0.1 * (k + 1), "n": 5, "sr": 40.0 + 10.0 * k}
          for k in range(6)]
    assert sr_trend_slope(down) < 0
    assert sr_trend_slope(up) > 0
