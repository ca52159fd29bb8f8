"""Grid and sampling planners plus the shared path toolbox."""

from __future__ import annotations

from ..costmap import Costmap
from ..geometry import Pose2D
from .astar import astar_cells, plan_astar
from .core import (
    MOVES,
    N_PATH_NODES,
    SQRT2,
    GridPath,
    PlannedPath,
    PlannerParams,
    collision_check,
    neighbors,
    octile_steps,
    path_cost_m,
    read_path_csv,
    resample,
    segment_cells_free,
    shortcut_smooth,
    snap_goal,
    trace_polyline_cells,
    traverse_cells,
    write_path_csv,
)
from .jps import jps_cells, plan_jps
from .sampling import plan_prm, plan_rrt_star

__all__ = [
    "MOVES",
    "N_PATH_NODES",
    "SQRT2",
    "GridPath",
    "PlannedPath",
    "PlannerParams",
    "astar_cells",
    "collision_check",
    "jps_cells",
    "neighbors",
    "octile_steps",
    "path_cost_m",
    "plan",
    "plan_astar",
    "plan_jps",
    "plan_label",
    "plan_prm",
    "plan_rrt_star",
    "read_path_csv",
    "resample",
    "segment_cells_free",
    "shortcut_smooth",
    "snap_goal",
    "trace_polyline_cells",
    "traverse_cells",
    "write_path_csv",
]


def plan(cmap: Costmap, start: Pose2D, goal: Pose2D, params: PlannerParams | None = None) -> GridPath:
    """Run the planner selected by params.algorithm. Start and goal must lie
    on Free cells (snap the goal first when it may fall elsewhere)."""
    params = params or PlannerParams()
    if params.algorithm == "astar":
        return plan_astar(cmap, start, goal)
    if params.algorithm == "jps":
        return plan_jps(cmap, start, goal)
    if params.algorithm == "rrtstar":
        return plan_rrt_star(cmap, start, goal, params)
    return plan_prm(cmap, start, goal, params)


def plan_label(cmap: Costmap, start: Pose2D, goal: Pose2D, params: PlannerParams | None = None) -> PlannedPath:
    """Snap the goal to Free space, plan, and resample to the 25-node label."""
    snapped = snap_goal(cmap, goal)
    return resample(plan(cmap, start, snapped, params), snapped)
