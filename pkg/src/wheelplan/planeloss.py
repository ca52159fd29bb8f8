"""Ground-plane disparity fit and the training losses built on it.

The disparity model is f(u, v) = a0 + a1 * (-u*sin(phi) + v*cos(phi)). The
fit reduces every candidate angle to a closed-form 2x2 solve over ten base
sums, so the angle search costs O(1) per evaluation after one O(n) pass.
All accumulation uses math.fsum, which makes results independent of pixel
order, bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraModel
from .errors import ContractViolation, DegenerateFit, InsufficientSamples
from .scene import DepthImage

MIN_DEPTH = 0.1  # m; pixels closer than this are treated as invalid

_GRID_DEG = 0.5
_GRID_HALF_DEG = 45.0
_REFINE_TOL_RAD = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PlaneFit:
    """Fitted ramp parameters; residual is the mean squared disparity error."""

    a0: float
    a1: float
    phi: float
    residual: float
    n: int


@dataclass(frozen=True)
class LossWeights:
    er: float = 0.10
    ir: float = 0.15


@dataclass(frozen=True)
class LossReport:
    l_ep: float
    l_er: float
    l_ip: float
    l_ir: float
    l_e: float
    l_i: float
    er_degenerate: bool = False
    ir_degenerate: bool = False


def _residual_pass(u, v, g, a0: float, a1: float, phi: float) -> float:
    s, c = math.sin(phi), math.cos(phi)
    total = math.fsum(
        (gi - a0 - a1 * (-ui * s + vi * c)) ** 2 for ui, vi, gi in zip(u, v, g)
    )
    return max(0.0, total / len(g))


def fit_plane(u, v, g) -> PlaneFit:
    """Least-squares fit of the disparity ramp over sample pixels.

    The angle is found by a coarse grid over [-45, 45] degrees (strict
    improvement, first winner kept) followed by golden-section refinement of
    the winning bracket. Raises DegenerateFit, with the constant-disparity
    fallback attached, when the ramp direction is unidentifiable.
    """
    u = [float(x) for x in np.asarray(u, dtype=float).ravel()]
    v = [float(x) for x in np.asarray(v, dtype=float).ravel()]
    g = [float(x) for x in np.asarray(g, dtype=float).ravel()]
    n = len(g)
    if len(u) != n or len(v) != n:
        raise ContractViolation("u, v, g must have equal lengths")
    if n == 0:
        raise ContractViolation("empty sample set")
    if not all(map(math.isfinite, u + v + g)):
        raise ContractViolation("samples must be finite")

    s_u = math.fsum(u)
    s_v = math.fsum(v)
    s_uu = math.fsum(x * x for x in u)
    s_vv = math.fsum(x * x for x in v)
    s_uv = math.fsum(x * y for x, y in zip(u, v))
    s_g = math.fsum(g)
    s_ug = math.fsum(x * y for x, y in zip(u, g))
    s_vg = math.fsum(x * y for x, y in zip(v, g))
    s_gg = math.fsum(x * x for x in g)

    mean_g = s_g / n
    var_g = s_gg / n - mean_g * mean_g

    def fallback() -> PlaneFit:
        res = _residual_pass(u, v, g, mean_g, 0.0, 0.0)
        return PlaneFit(a0=mean_g, a1=0.0, phi=0.0, residual=res, n=n)

    if n < 3:
        raise InsufficientSamples(f"need at least 3 samples, got {n}")
    if var_g <= 1e-12 * max(1.0, s_gg / n):
        raise DegenerateFit("disparity samples carry no ramp signal", fit=fallback())

    def solve(phi: float):
        s, c = math.sin(phi), math.cos(phi)
        st = -s * s_u + c * s_v
        stt = s * s * s_uu + c * c * s_vv - 2.0 * s * c * s_uv
        stg = -s * s_ug + c * s_vg
        det = n * stt - st * st
        if det <= 1e-9 * max(1.0, n * stt):
            return None
        a1 = (n * stg - st * s_g) / det
        a0 = (s_g - a1 * st) / n
        return s_gg - a0 * s_g - a1 * stg, a0, a1

    best = None
    best_phi = 0.0
    steps = int(round(2 * _GRID_HALF_DEG / _GRID_DEG))
    for k in range(steps + 1):
        phi = math.radians(-_GRID_HALF_DEG + k * _GRID_DEG)
        r = solve(phi)
        if r is not None and (best is None or r[0] < best[0]):
            best = r
            best_phi = phi
    if best is None:
        raise DegenerateFit("pixel layout is degenerate at every angle", fit=fallback())

    half = math.radians(_GRID_DEG)
    lo, hi = best_phi - half, best_phi + half

    def sse(phi: float) -> float:
        r = solve(phi)
        return math.inf if r is None else r[0]

    c_pt = hi - _INVPHI * (hi - lo)
    d_pt = lo + _INVPHI * (hi - lo)
    while hi - lo > _REFINE_TOL_RAD:
        if sse(c_pt) < sse(d_pt):
            hi = d_pt
        else:
            lo = c_pt
        c_pt = hi - _INVPHI * (hi - lo)
        d_pt = lo + _INVPHI * (hi - lo)
    phi = 0.5 * (lo + hi)
    r = solve(phi)
    if r is None:
        phi = best_phi
        r = best
    _, a0, a1 = r
    return PlaneFit(a0=a0, a1=a1, phi=phi, residual=_residual_pass(u, v, g, a0, a1, phi), n=n)


def fit_ground_plane(depth: DepthImage, mask) -> PlaneFit:
    """Fit the ramp to pixels where mask > 0.5 and depth is valid."""
    m = np.asarray(mask)
    if m.shape != depth.data.shape:
        raise ContractViolation("mask and depth shapes differ")
    sel = (m.astype(float) > 0.5) & (depth.data >= MIN_DEPTH)
    vs, us = np.nonzero(sel)
    if len(us) < 3:
        raise InsufficientSamples(f"only {len(us)} usable ground pixels")
    return fit_plane(us, vs, 1.0 / depth.data[sel])


def loss_er(depth: DepthImage, mask) -> float:
    """Mean squared disparity residual of the ground fit; a degenerate fit
    falls back to the constant-disparity residual."""
    try:
        return fit_ground_plane(depth, mask).residual
    except DegenerateFit as e:
        return e.fit.residual


def loss_ir(depth: DepthImage, cam: CameraModel, fit: PlaneFit, path) -> float:
    """Mean squared disparity error of the path nodes against the fitted
    ramp. Nodes are lifted to the ground plane, projected, and sampled at
    the rounded pixel; nodes that land outside the image or on invalid depth
    are skipped."""
    pos = np.asarray(getattr(path, "positions", path), dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ContractViolation("path must be an (n, 2) array of xy nodes")
    pts = np.column_stack([pos, np.zeros(len(pos))])
    us, vs, zs = cam.project_body_points(pts)
    s, c = math.sin(fit.phi), math.cos(fit.phi)
    terms = []
    for ui, vi, zi in zip(us, vs, zs):
        if not (math.isfinite(ui) and math.isfinite(vi)) or zi <= 0:
            continue
        px, py = int(round(ui)), int(round(vi))
        if not (0 <= px < cam.width and 0 <= py < cam.height):
            continue
        d = depth.data[py, px]
        if d < MIN_DEPTH:
            continue
        f = fit.a0 + fit.a1 * (-px * s + py * c)
        terms.append((1.0 / d - f) ** 2)
    if not terms:
        raise InsufficientSamples("no path node projects onto valid depth")
    return math.fsum(terms) / len(terms)


def loss_ip(pred_path, target_path) -> float:
    """Mean Euclidean node error between two 25-node paths."""
    a = np.asarray(getattr(pred_path, "positions", pred_path), dtype=float)
    b = np.asarray(getattr(target_path, "positions", target_path), dtype=float)
    if a.shape != (25, 2) or b.shape != (25, 2):
        raise ContractViolation("paths must be (25, 2) arrays")
    d = np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])
    return math.fsum(d.tolist()) / 25.0


def loss_ep(pred_mask, target_mask) -> float:
    """Mean binary cross entropy; predictions are clamped away from {0, 1}."""
    p = np.asarray(pred_mask, dtype=float)
    t = np.asarray(target_mask, dtype=float)
    if p.shape != t.shape:
        raise ContractViolation("mask shapes differ")
    if p.size == 0:
        raise ContractViolation("empty masks")
    if np.any((t != 0.0) & (t != 1.0)):
        raise ContractViolation("target mask must be binary")
    p = np.clip(p, 1e-7, 1.0 - 1e-7)
    return float(np.mean(-(t * np.log(p) + (1.0 - t) * np.log1p(-p))))


def combined_losses(*, depth: DepthImage, ground_mask, cam: CameraModel,
                    pred_mask, target_mask, pred_path, target_path,
                    weights: LossWeights = LossWeights()) -> LossReport:
    """Assemble both loss branches. A ground fit that cannot be made (too
    few samples) contributes zero and sets the degenerate flag; a degenerate
    fit contributes its constant-model residual."""
    l_ep = loss_ep(pred_mask, target_mask)
    l_ip = loss_ip(pred_path, target_path)
    er_deg = False
    fit = None
    try:
        fit = fit_ground_plane(depth, ground_mask)
        l_er = fit.residual
    except DegenerateFit as e:
        fit = e.fit
        l_er = e.fit.residual
        er_deg = True
    except InsufficientSamples:
        l_er = 0.0
        er_deg = True
    ir_deg = False
    if fit is None:
        l_ir = 0.0
        ir_deg = True
    else:
        try:
            l_ir = loss_ir(depth, cam, fit, pred_path)
        except InsufficientSamples:
            l_ir = 0.0
            ir_deg = True
    return LossReport(
        l_ep=l_ep,
        l_er=l_er,
        l_ip=l_ip,
        l_ir=l_ir,
        l_e=l_ep + weights.er * l_er,
        l_i=l_ip + weights.ir * l_ir,
        er_degenerate=er_deg,
        ir_degenerate=ir_deg,
    )
