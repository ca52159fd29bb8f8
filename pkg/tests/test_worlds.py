"""Benchmark world generators."""
from __future__ import annotations

import numpy as np
import pytest

from wheelplan import FREE, OCCUPIED, PlannerParams, plan, snap_goal
from wheelplan.worlds import corridor_world, open_world


@pytest.mark.parametrize("factory", [corridor_world, open_world])
def test_world_deterministic_per_seed(factory):
    cm1, s1, g1 = factory(4)
    cm2, s2, g2 = factory(4)
    assert np.array_equal(cm1.cells, cm2.cells)
    assert (s1.x, s1.y, s1.theta) == (s2.x, s2.y, s2.theta)
    assert (g1.x, g1.y, g1.theta) == (g2.x, g2.y, g2.theta)
    cm3, _, _ = factory(5)
    assert not np.array_equal(cm1.cells, cm3.cells)


@pytest.mark.parametrize("factory", [corridor_world, open_world])
def test_world_geometry_and_border(factory):
    cm, _, _ = factory(1, size_m=12.0)
    assert cm.width == cm.height == 120
    assert cm.resolution == 0.1
    # solid boundary wall
    assert (cm.cells[0, :] == OCCUPIED).all() and (cm.cells[-1, :] == OCCUPIED).all()
    assert (cm.cells[:, 0] == OCCUPIED).all() and (cm.cells[:, -1] == OCCUPIED).all()
    assert (cm.cells == FREE).sum() > 0


@pytest.mark.parametrize("factory", [corridor_world, open_world])
@pytest.mark.parametrize("seed", range(8))
def test_world_start_goal_free_and_solvable(factory, seed):
    cm, start, goal = factory(seed, size_m=12.0)
    sx, sy = cm.cell_of(start.x, start.y)
    gx, gy = cm.cell_of(goal.x, goal.y)
    assert cm.cells[sy, sx] == FREE
    assert cm.cells[gy, gx] == FREE
    out = plan(cm, snap_goal(cm, start), snap_goal(cm, goal), PlannerParams(algorithm="astar"))
    assert out.cost_m > 0


def test_corridor_walls_separate_start_and_goal():
    # removing the wall gaps must disconnect start from goal, so any
    # successful plan necessarily threads the corridor gaps
    cm, start, goal = corridor_world(2, size_m=16.0)
    occ_cols = (cm.cells == OCCUPIED).sum(axis=0)
    interior = occ_cols[2:-2]
    # cross walls occupy most of their column; gaps claw back < 40%
    wall_cols = np.nonzero(interior > cm.height * 0.6)[0] + 2
    assert len(wall_cols) >= 2
    sx, _ = cm.cell_of(start.x, start.y)
    gx, _ = cm.cell_of(goal.x, goal.y)
    assert sx < wall_cols.min() and gx > wall_cols.max()


def test_open_world_obstacle_count_scales():
    cm_few, _, _ = open_world(3, size_m=14.0, n_obstacles=2)
    cm_many, _, _ = open_world(3, size_m=14.0, n_obstacles=20)
    assert (cm_many.cells == OCCUPIED).sum() > (cm_few.cells == OCCUPIED).sum()
