"""Disparity plane fit and the four loss evaluators.

Ground-truth forward model: g = a0 + a1*(-u sin(phi) + v cos(phi)). Noiseless
samples from this model must be recovered to machine-level accuracy, and the
fit must never beat the dense-scan oracle by more than summation noise (the
oracle itself solves exactly at each scanned angle).
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import plane_oracle
from wheelplan.camera import default_camera
from wheelplan.costmap import CLASS_DRIVABLE, CLASS_OBSTACLE
from wheelplan.errors import ContractViolation, DegenerateFit, InsufficientSamples
from wheelplan.geometry import Pose2D
from wheelplan.planeloss import (
    LossWeights,
    combined_losses,
    fit_ground_plane,
    fit_plane,
    loss_ep,
    loss_er,
    loss_ip,
    loss_ir,
)
from wheelplan.scene import DepthImage, ObstacleSpec, SceneSpec, generate_scene


def synth_samples(rng, a0, a1, phi, n=300, sigma=0.0):
    u = rng.uniform(0, 320, n)
    v = rng.uniform(0, 224, n)
    g = a0 + a1 * (-u * math.sin(phi) + v * math.cos(phi))
    if sigma:
        g = g + rng.normal(0, sigma, n)
    return u, v, g


def test_fit_plane_recovers_zero_roll():
    rng = np.random.default_rng(0)
    u, v, g = synth_samples(rng, 0.2, 0.004, 0.0)
    fit = fit_plane(u, v, g)
    assert abs(fit.a0 - 0.2) <= 1e-6
    assert abs(fit.a1 - 0.004) <= 1e-6
    assert fit.residual <= 1e-12
    assert fit.n == 300


def test_fit_plane_recovers_five_degree_roll():
    rng = np.random.default_rng(1)
    phi = math.radians(5.0)
    u, v, g = synth_samples(rng, 0.2, 0.004, phi)
    fit = fit_plane(u, v, g)
    assert abs(math.degrees(fit.phi - phi)) <= 0.01
    assert fit.residual <= 1e-10


def test_fit_plane_matches_scan_oracle():
    rng = np.random.default_rng(2)
    for _ in range(10):
        a0 = rng.uniform(0.05, 0.5)
        a1 = rng.uniform(0.001, 0.01)
        phi = math.radians(rng.uniform(-30, 30))
        u, v, g = synth_samples(rng, a0, a1, phi, n=200, sigma=0.005)
        fit = fit_plane(u, v, g)
        oa0, oa1, ophi, ores = plane_oracle(u, v, g)
        # the solver may not beat the oracle's best scanned angle by more
        # than numerical noise, and must not be worse either
        assert fit.residual <= ores + 1e-9
        assert abs(fit.a0 - oa0) <= 1e-4
        assert abs(fit.a1 - oa1) <= 1e-5
        assert abs(math.degrees(fit.phi - ophi)) <= 0.01


def test_fit_plane_order_invariant_bit_exact():
    rng = np.random.default_rng(3)
    u, v, g = synth_samples(rng, 0.3, 0.006, math.radians(-12.0), sigma=0.01)
    fit = fit_plane(u, v, g)
    perm = rng.permutation(len(u))
    fit2 = fit_plane(u[perm], v[perm], g[perm])
    assert fit.a0 == fit2.a0
    assert fit.a1 == fit2.a1
    assert fit.phi == fit2.phi
    assert fit.residual == fit2.residual


def test_fit_plane_two_samples_insufficient():
    with pytest.raises(InsufficientSamples):
        fit_plane([0.0, 1.0], [0.0, 1.0], [0.1, 0.2])


def test_fit_plane_constant_disparity_degenerate():
    with pytest.raises(DegenerateFit) as e:
        fit_plane(np.zeros(5), np.zeros(5), np.full(5, 0.25))
    fb = e.value.fit
    assert fb.a1 == 0.0
    assert fb.a0 == pytest.approx(0.25)
    assert fb.residual == pytest.approx(0.0, abs=1e-15)


def test_fit_plane_length_mismatch():
    with pytest.raises(ContractViolation):
        fit_plane([0.0, 1.0], [0.0], [0.1, 0.2])


def flat_scene(cam, obstacles=()):
    spec = SceneSpec(extent=(12.0, 10.0), camera_pose=Pose2D(1.0, 5.0, 0.0),
                     obstacles=tuple(obstacles))
    return generate_scene(spec, cam, seed=0)


def test_loss_er_ground_only_tiny(cam):
    depth, sem, _, _ = flat_scene(cam)
    ground = sem.data == CLASS_DRIVABLE
    assert loss_er(depth, ground) <= 1e-10


def test_loss_er_obstacle_face_strictly_larger(cam):
    box = ObstacleSpec(kind="box", x=4.0, y=5.0, size_x=0.6, size_y=0.6, height=1.5)
    depth, sem, _, _ = flat_scene(cam, [box])
    ground = sem.data == CLASS_DRIVABLE
    mixed = ground | (sem.data == CLASS_OBSTACLE)
    assert loss_er(depth, mixed) > loss_er(depth, ground)


def test_loss_er_two_pixels_insufficient(cam):
    depth, _, _, _ = flat_scene(cam)
    mask = np.zeros(depth.data.shape, dtype=bool)
    mask[150, 100] = mask[150, 101] = True
    with pytest.raises(InsufficientSamples):
        loss_er(depth, mask)


def test_loss_ir_flat_path_small(cam):
    depth, sem, _, _ = flat_scene(cam)
    fit = fit_ground_plane(depth, sem.data == CLASS_DRIVABLE)
    path = np.column_stack([np.linspace(1.0, 4.0, 25), np.zeros(25)])
    assert loss_ir(depth, cam, fit, path) <= 1e-10


def test_loss_ir_path_onto_obstacle_larger(cam):
    box = ObstacleSpec(kind="box", x=4.0, y=5.0, size_x=0.6, size_y=0.6, height=1.5)
    depth, sem, _, _ = flat_scene(cam, [box])
    fit = fit_ground_plane(depth, sem.data == CLASS_DRIVABLE)
    flat = np.column_stack([np.linspace(1.0, 2.4, 25), np.full(25, -0.8)])
    onto = np.column_stack([np.linspace(1.0, 3.2, 25), np.zeros(25)])  # ends on the box
    assert loss_ir(depth, cam, fit, onto) > loss_ir(depth, cam, fit, flat)


def test_loss_ir_behind_camera_insufficient(cam):
    depth, sem, _, _ = flat_scene(cam)
    fit = fit_ground_plane(depth, sem.data == CLASS_DRIVABLE)
    path = np.column_stack([np.linspace(-5.0, -1.0, 25), np.zeros(25)])
    with pytest.raises(InsufficientSamples):
        loss_ir(depth, cam, fit, path)


def test_loss_ip_examples():
    base = np.column_stack([np.linspace(0, 2.4, 25), np.zeros(25)])
    assert loss_ip(base, base) == 0.0
    shifted = base + np.array([0.3, 0.4])
    assert loss_ip(base, shifted) == pytest.approx(0.5)
    one_off = base.copy()
    one_off[7] += np.array([0.0, 1.0])
    assert loss_ip(base, one_off) == pytest.approx(0.04)


def test_loss_ip_is_metric():
    rng = np.random.default_rng(4)
    paths = [rng.uniform(-5, 5, (25, 2)) for _ in range(12)]
    for a in paths:
        assert loss_ip(a, a) == 0.0
    for a in paths:
        for b in paths:
            assert loss_ip(a, b) == pytest.approx(loss_ip(b, a), abs=1e-15)
    for a in paths[:6]:
        for b in paths[:6]:
            for c in paths[:6]:
                assert loss_ip(a, c) <= loss_ip(a, b) + loss_ip(b, c) + 1e-12


def test_loss_ip_node_count_mismatch():
    with pytest.raises(ContractViolation):
        loss_ip(np.zeros((24, 2)), np.zeros((25, 2)))


def test_loss_ep_half_everywhere_is_ln2():
    t = np.zeros((50, 50))
    t[10:20, 10:20] = 1.0
    p = np.full((50, 50), 0.5)
    assert loss_ep(p, t) == pytest.approx(math.log(2.0), abs=1e-9)


def test_loss_ep_perfect_prediction_tiny():
    t = np.zeros((20, 20))
    t[5:10, 5:10] = 1.0
    assert loss_ep(t, t) <= 1e-6


def test_loss_ep_inverted_prediction_at_clamp():
    t = np.zeros((20, 20))
    t[:10] = 1.0
    val = loss_ep(1.0 - t, t)
    assert val == pytest.approx(-math.log(1e-7), rel=1e-6)


def test_loss_ep_shape_mismatch():
    with pytest.raises(ContractViolation):
        loss_ep(np.zeros((4, 4)), np.zeros((5, 5)))


def test_combined_losses_weighted_sums(cam):
    depth, sem, _, _ = flat_scene(cam)
    ground = sem.data == CLASS_DRIVABLE
    t = np.zeros(depth.data.shape)
    t[100:120, 100:200] = 1.0
    path = np.column_stack([np.linspace(1.0, 4.0, 25), np.zeros(25)])
    rep = combined_losses(depth=depth, ground_mask=ground, cam=cam,
                          pred_mask=np.full(t.shape, 0.5), target_mask=t,
                          pred_path=path, target_path=path)
    assert rep.l_e == pytest.approx(rep.l_ep + 0.10 * rep.l_er)
    assert rep.l_i == pytest.approx(rep.l_ip + 0.15 * rep.l_ir)
    assert rep.l_ip == 0.0
    assert not rep.er_degenerate


def test_combined_losses_weight_arithmetic():
    # the documented weighting: 0.5 + 0.10*1.0 = 0.6 and 0.2 + 0.15*2.0 = 0.5
    w = LossWeights()
    assert 0.5 + w.er * 1.0 == pytest.approx(0.6)
    assert 0.2 + w.ir * 2.0 == pytest.approx(0.5)
