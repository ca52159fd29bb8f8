"""Evaluation: per-path success checks, the normalized turning cost, suite
aggregation (SR / TC tables), costmap-quality binning, and re-scoring of a
generated dataset from its manifest."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .camera import CameraModel, default_camera
from .costmap import Costmap, costmap_distance, load_costmap
from .errors import ContractViolation
from .geometry import Pose2D, wrap_angle
from .labels import perceived_costmap, read_manifest
from .planners import N_PATH_NODES, PlannedPath, collision_check, read_path_csv
from .sceneio import load_depth, load_semantic
from .util import parallel_map

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class EvalRecord:
    """One scored sample: outcome plus the metrics the tables aggregate."""

    planner: str
    success: bool
    reason: str  # ok | collision | goal_missed | <failure status>
    tc: float | None = None
    quality: float | None = None  # costmap distance D, perceived vs truth
    cost_m: float | None = None
    sample: str = ""

    def __post_init__(self):
        if self.success and self.reason not in ("", "ok"):
            raise ContractViolation("a successful record cannot carry a failure reason")
        if self.tc is not None and self.tc < 0:
            raise ContractViolation("turning cost must be nonnegative")
        if self.quality is not None and not (0.0 <= self.quality <= 1.0):
            raise ContractViolation("costmap distance D lies in [0, 1]")


def check_success(planned: PlannedPath, cmap: Costmap, goal: Pose2D, *, tol: float = 0.2):
    """(success, reason): every inter-node segment must stay on Free cells
    and the final node must land within tol of the goal position."""
    pos = planned.positions
    for a, b in zip(pos[:-1], pos[1:]):
        if not collision_check(cmap, a, b):
            return False, "collision"
    if math.hypot(pos[-1, 0] - goal.x, pos[-1, 1] - goal.y) > tol:
        return False, "goal_missed"
    return True, "ok"


def turning_cost(planned: PlannedPath, initial_heading: float = 0.0) -> float:
    """Normalized turning cost: the 25 per-node heading changes, summed in
    absolute value and divided by 25 * 90 degrees.

    Node 1 turns from the initial heading onto the first segment; nodes 2-24
    turn between consecutive segments; node 25 turns from the last segment
    onto the goal heading. Zero-length segments carry the previous direction
    forward, so they contribute no turn.
    """
    pos = planned.positions
    heading = float(initial_heading)
    total = 0.0
    for i in range(N_PATH_NODES - 1):
        dx = pos[i + 1, 0] - pos[i, 0]
        dy = pos[i + 1, 1] - pos[i, 1]
        if dx == 0.0 and dy == 0.0:
            continue
        d = math.atan2(dy, dx)
        total += abs(wrap_angle(d - heading))
        heading = d
    total += abs(wrap_angle(planned.goal_theta - heading))
    return total / (N_PATH_NODES * HALF_PI)


def evaluate_suite(records, planners=None) -> list[dict]:
    """Per-planner aggregate rows: n, success rate in percent, and mean TC
    over successful runs. Planners named explicitly get a row even at n=0."""
    groups: dict[str, list[EvalRecord]] = {}
    for r in records:
        groups.setdefault(r.planner, []).append(r)
    names = list(planners) if planners is not None else sorted(groups)
    for name in groups:
        if name not in names:
            names.append(name)
    rows = []
    for name in names:
        rs = groups.get(name, [])
        n = len(rs)
        wins = [r for r in rs if r.success]
        tcs = [r.tc for r in wins if r.tc is not None]
        rows.append({
            "planner": name,
            "n": n,
            "sr": 100.0 * len(wins) / n if n else None,
            "mean_tc": math.fsum(tcs) / len(tcs) if tcs else None,
        })
    return rows


def bin_by_quality(records, n_bins: int = 6) -> list[dict]:
    """Equal-width bins over the observed quality range, each carrying its
    sample count and success rate. A degenerate range yields a single bin."""
    scored = [r for r in records if r.quality is not None]
    if not scored:
        return []
    qs = [r.quality for r in scored]
    lo, hi = min(qs), max(qs)
    if hi <= lo:
        n = len(scored)
        sr = 100.0 * sum(r.success for r in scored) / n
        return [{"lo": lo, "hi": hi, "n": n, "sr": sr}]
    width = (hi - lo) / n_bins
    bins = [{"lo": lo + k * width, "hi": lo + (k + 1) * width, "n": 0, "wins": 0} for k in range(n_bins)]
    for r in scored:
        k = min(int((r.quality - lo) / width), n_bins - 1)
        bins[k]["n"] += 1
        bins[k]["wins"] += int(r.success)
    out = []
    for b in bins:
        out.append({
            "lo": b["lo"], "hi": b["hi"], "n": b["n"],
            "sr": 100.0 * b["wins"] / b["n"] if b["n"] else None,
        })
    return out


def sr_trend_slope(bins) -> float:
    """Least-squares slope of success rate against bin-center quality over
    populated bins. Needs at least two populated bins."""
    pts = [((b["lo"] + b["hi"]) / 2.0, b["sr"]) for b in bins if b["n"]]
    if len(pts) < 2:
        raise ContractViolation("need at least two populated bins for a trend")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    a = np.vstack([x, np.ones_like(x)]).T
    slope, _ = np.linalg.lstsq(a, y, rcond=None)[0]
    return float(slope)


def _score_row(args) -> EvalRecord | None:
    """None means the sample was skipped (no ground truth on disk)."""
    root, row, cam, tol = args
    gt_path = os.path.join(root, os.path.dirname(row["depth"]), "gt.costmap")
    if not os.path.exists(gt_path):
        return None
    gt = load_costmap(gt_path)
    depth = load_depth(os.path.join(root, row["depth"]))
    semantic = load_semantic(os.path.join(root, row["semantic"]))
    perceived = perceived_costmap(depth, semantic, cam)
    quality = costmap_distance(perceived, gt)
    planned = read_path_csv(os.path.join(root, row["path_csv"]))
    goal = Pose2D(row["goal_x"], row["goal_y"], row["goal_theta"])
    success, reason = check_success(planned, gt, goal, tol=tol)
    return EvalRecord(
        planner=row["planner"], success=success, reason=reason,
        tc=turning_cost(planned), quality=quality,
        sample=os.path.dirname(row["depth"]),
    )


def evaluate_manifest(manifest_path, *, cam: CameraModel | None = None, tol: float = 0.2):
    """Re-score every manifest sample against its ground-truth costmap.

    The perceived costmap is rebuilt from the stored depth and semantic
    images; its distance to the sibling gt.costmap becomes the quality value.
    Samples whose gt.costmap is missing are skipped (counted); samples with a
    failure status stay in the records as failures so they weigh down SR.
    Rows are scored through parallel_map. Returns (records, skipped).
    """
    cam = cam or default_camera()
    root = os.path.dirname(os.path.abspath(manifest_path))
    _, rows = read_manifest(manifest_path)
    ok_rows = [row for row in rows if row["status"] == "ok"]
    scored = iter(parallel_map(_score_row, [(root, row, cam, tol) for row in ok_rows]))
    records: list[EvalRecord] = []
    skipped = 0
    for row in rows:
        if row["status"] != "ok":
            records.append(EvalRecord(planner=row["planner"], success=False, reason=row["status"],
                                      sample=os.path.dirname(row["depth"])))
            continue
        rec = next(scored)
        if rec is None:
            skipped += 1
        else:
            records.append(rec)
    return records, skipped


def format_table(rows) -> str:
    """Fixed-width text table for the suite rows."""
    header = f"{'planner':<10} {'n':>5} {'SR%':>7} {'meanTC':>8}"
    lines = [header, "-" * len(header)]
    for r in rows:
        sr = "-" if r["sr"] is None else f"{r['sr']:.1f}"
        tc = "-" if r["mean_tc"] is None else f"{r['mean_tc']:.4f}"
        lines.append(f"{r['planner']:<10} {r['n']:>5} {sr:>7} {tc:>8}")
    return "\n".join(lines)


def write_suite_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["planner", "n", "SR_percent", "mean_TC"])
        w.writeheader()
        for r in rows:
            w.writerow({"planner": r["planner"], "n": r["n"],
                        "SR_percent": r["sr"], "mean_TC": r["mean_tc"]})
