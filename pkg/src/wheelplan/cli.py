"""Command line entry point.

Exit codes: 0 success, 1 domain failure (JSON error object on stderr),
2 usage or input-syntax error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .camera import default_camera
from .costmap import load_costmap, save_costmap
from .errors import ParseError, WheelplanError
from .evaluation import (
    bin_by_quality,
    evaluate_manifest,
    evaluate_suite,
    format_table,
    sr_trend_slope,
    write_suite_csv,
)
from .geometry import Pose2D
from .labels import generate_dataset, perceived_costmap, random_scene_spec
from .navigation import WorldMap, simulate_navigation
from .planeloss import combined_losses
from .planners import PlannerParams, plan, read_path_csv, resample, snap_goal, write_path_csv
from .render import save_render
from .scene import CLASS_DRIVABLE, generate_scene
from .sceneio import load_camera, load_depth, load_mask, load_semantic, save_depth, save_semantic
from .util import __version__, parallel_map, provenance_lines
from .worlds import corridor_world, open_world


def _camera(args):
    return load_camera(args.camera) if getattr(args, "camera", None) else default_camera()


def _parse_pose(text: str, *, need_theta: bool = False) -> Pose2D:
    parts = text.split(",")
    if len(parts) not in (2, 3) or (need_theta and len(parts) != 3):
        raise ParseError(f"expected 'x,y[,theta]', got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ParseError(f"non-numeric pose field in {text!r}") from None
    return Pose2D(vals[0], vals[1], vals[2] if len(vals) == 3 else 0.0)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_gen_scenes(args) -> int:
    cam = _camera(args)
    os.makedirs(args.out, exist_ok=True)
    prov = provenance_lines("gen-scenes", seed=args.seed)
    for i in range(args.count):
        rng = np.random.default_rng(np.random.SeedSequence((args.seed & 0xFFFFFFFF, i, 0xDA7A)))
        spec = random_scene_spec(rng, depth_sigma=args.depth_noise, misclass_rate=args.misclass_rate)
        noise_seed = int(rng.integers(0, 2**31))
        depth, semantic, rgb, gt = generate_scene(spec, cam, seed=noise_seed)
        d = os.path.join(args.out, f"scene_{i:05d}")
        os.makedirs(d, exist_ok=True)
        with open(os.path.join(d, "spec.json"), "w") as f:
            json.dump(spec.to_dict(), f, sort_keys=True, indent=2)
            f.write("\n")
        save_depth(os.path.join(d, "depth.pgm"), depth, provenance=prov)
        save_semantic(os.path.join(d, "semantic.pgm"), semantic, provenance=prov)
        with open(os.path.join(d, "rgb.ppm"), "wb") as f:
            f.write(rgb.data)
        save_costmap(os.path.join(d, "gt.costmap"), gt, provenance=prov)
    _emit({"out": args.out, "scenes": args.count, "seed": args.seed})
    return 0


def cmd_build_costmap(args) -> int:
    cam = _camera(args)
    depth = load_depth(args.depth)
    semantic = load_semantic(args.semantic)
    cmap = perceived_costmap(depth, semantic, cam, single_hull=args.single_hull)
    prov = provenance_lines("build-costmap", inputs=[args.depth, args.semantic])
    save_costmap(args.out, cmap, provenance=prov)
    free = int((cmap.cells == 1).sum())
    occ = int((cmap.cells == 2).sum())
    _emit({"out": args.out, "free_cells": free, "occupied_cells": occ})
    return 0


def cmd_plan(args) -> int:
    cmap = load_costmap(args.map)
    # perceived costmaps leave the body origin Unknown (camera blind zone),
    # so the start gets the same nearest-Free-cell treatment as the goal
    start = snap_goal(cmap, _parse_pose(args.start))
    goal = snap_goal(cmap, _parse_pose(args.goal, need_theta=True))
    params = PlannerParams(algorithm=args.algo, seed=args.seed, smooth=not args.no_smooth)
    gp = plan(cmap, start, goal, params)
    planned = resample(gp, goal)
    prov = provenance_lines("plan", seed=args.seed, inputs=[args.map])
    write_path_csv(args.out, planned, provenance=prov)
    _emit({"out": args.out, "algorithm": gp.algorithm, "cost_m": gp.cost_m})
    return 0


def cmd_gen_dataset(args) -> int:
    cam = load_camera(args.camera) if args.camera else None
    summary = generate_dataset(
        args.out, args.count, args.seed, planner=args.planner,
        goals_per_scene=args.goals_per_scene,
        depth_sigma=args.depth_noise, misclass_rate=args.misclass_rate, cam=cam,
    )
    _emit(summary)
    return 0


def cmd_losses(args) -> int:
    cam = _camera(args)
    depth = load_depth(args.depth)
    semantic = load_semantic(args.semantic)
    report = combined_losses(
        depth=depth,
        ground_mask=semantic.data == CLASS_DRIVABLE,
        cam=cam,
        pred_mask=load_mask(args.pred_mask).astype(float),
        target_mask=load_mask(args.target_mask).astype(float),
        pred_path=read_path_csv(args.pred_path),
        target_path=read_path_csv(args.target_path),
    )
    _emit({
        "l_ep": report.l_ep, "l_er": report.l_er, "l_ip": report.l_ip,
        "l_ir": report.l_ir, "l_e": report.l_e, "l_i": report.l_i,
        "er_degenerate": report.er_degenerate, "ir_degenerate": report.ir_degenerate,
    })
    return 0


def _nav_job(job) -> dict:
    kind, seed, noise, algorithm, max_iters, trace_dir, fov_only = job
    maker = corridor_world if kind == "corridor" else open_world
    cmap, start, goal = maker(seed)
    params = PlannerParams(algorithm=algorithm, seed=seed, max_iters=max_iters)
    rep = simulate_navigation(WorldMap(cmap), start, goal, params=params, noise=noise,
                              seed=seed, fov_only=fov_only)
    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)
        path = os.path.join(trace_dir, f"nav_{seed:05d}.csv")
        with open(path, "w", encoding="ascii") as fh:
            for line in provenance_lines("navigate", seed=seed):
                fh.write(f"# {line}\n")
            fh.write("x,y\n")
            for x, y in rep.trace:
                fh.write(f"{float(x)!r},{float(y)!r}\n")
    return {
        "seed": seed, "outcome": rep.outcome, "legs": rep.legs,
        "collisions": rep.collisions, "path_length_m": rep.distance_m,
        "mean_D": rep.mean_quality, "mean_TC": rep.mean_tc,
    }


def cmd_navigate(args) -> int:
    if args.seeds:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
        except ValueError:
            raise ParseError(f"bad --seeds list {args.seeds!r}") from None
    else:
        seeds = list(range(args.runs))
    jobs = [(args.world, s, args.noise, args.algorithm, args.max_iters, args.trace_dir,
             args.fov_only) for s in seeds]
    rows = parallel_map(_nav_job, jobs)
    for row in rows:
        _emit(row)
    n = len(rows)
    wins = sum(r["outcome"] == "success" for r in rows)
    _emit({"runs": n, "success_rate": 100.0 * wins / n if n else None})
    return 0


def cmd_evaluate(args) -> int:
    cam = load_camera(args.camera) if args.camera else None
    records, skipped = evaluate_manifest(args.manifest, cam=cam)
    rows = evaluate_suite(records)
    print(format_table(rows))
    print(f"skipped (missing ground truth): {skipped}")
    if args.csv:
        write_suite_csv(args.csv, rows)
    if args.bins:
        bins = bin_by_quality(records, n_bins=args.bins)
        for b in bins:
            sr = "-" if b["sr"] is None else f"{b['sr']:.1f}"
            print(f"D in [{b['lo']:.4f}, {b['hi']:.4f}]  n={b['n']:<4d} SR%={sr}")
        populated = sum(1 for b in bins if b["n"])
        if populated >= 2:
            print(f"SR trend slope: {sr_trend_slope(bins):.3f} %/D")
    return 0


def cmd_render(args) -> int:
    cmap = load_costmap(args.map)
    planned = read_path_csv(args.path) if args.path else None
    inputs = [args.map] + ([args.path] if args.path else [])
    prov = provenance_lines("render", inputs=inputs)
    save_render(args.out, cmap, planned, scale=args.scale, provenance=prov)
    _emit({"out": args.out})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wheelplan", description="Wheelchair path planning toolkit")
    p.add_argument("--version", action="version", version=f"wheelplan {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add_camera(sp):
        sp.add_argument("--camera", help="camera config file (default: built-in forward rig)")

    sp = sub.add_parser("gen-scenes", help="render randomized synthetic scenes")
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth-noise", type=float, default=0.0)
    sp.add_argument("--misclass-rate", type=float, default=0.0)
    add_camera(sp)
    sp.set_defaults(func=cmd_gen_scenes)

    sp = sub.add_parser("build-costmap", help="depth+semantic images to a costmap")
    sp.add_argument("--depth", required=True)
    sp.add_argument("--semantic", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--single-hull", action="store_true",
                    help="one hull around all obstacle points instead of per-cluster hulls")
    add_camera(sp)
    sp.set_defaults(func=cmd_build_costmap)

    sp = sub.add_parser("plan", help="plan a 25-node path on a costmap")
    sp.add_argument("--map", required=True, help="costmap text file")
    sp.add_argument("--goal", required=True, help="x,y,theta")
    sp.add_argument("--start", default="0,0,0", help="x,y[,theta]")
    sp.add_argument("--algo", "--algorithm", default="astar",
                    choices=["astar", "jps", "rrtstar", "prm"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--no-smooth", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("gen-dataset", help="scenes, labels and manifest")
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--goals-per-scene", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--planner", default="astar", choices=["astar", "jps", "rrtstar", "prm"])
    sp.add_argument("--depth-noise", type=float, default=0.0)
    sp.add_argument("--misclass-rate", type=float, default=0.0)
    add_camera(sp)
    sp.set_defaults(func=cmd_gen_dataset)

    sp = sub.add_parser("losses", help="training losses for one sample")
    sp.add_argument("--depth", required=True)
    sp.add_argument("--semantic", required=True)
    sp.add_argument("--pred-mask", required=True)
    sp.add_argument("--target-mask", required=True)
    sp.add_argument("--pred-path", required=True)
    sp.add_argument("--target-path", required=True)
    add_camera(sp)
    sp.set_defaults(func=cmd_losses)

    sp = sub.add_parser("navigate", help="closed-loop simulation runs")
    sp.add_argument("--world", default="corridor", choices=["corridor", "open"])
    sp.add_argument("--seeds", help="comma-separated world seeds")
    sp.add_argument("--runs", type=int, default=5, help="use seeds 0..N-1 when --seeds is absent")
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--algorithm", default="rrtstar", choices=["astar", "jps", "rrtstar", "prm"])
    sp.add_argument("--max-iters", type=int, default=800)
    sp.add_argument("--trace-dir", help="dump per-run trajectory CSVs here")
    sp.add_argument("--fov-only", action="store_true",
                    help="drop the occlusion clause from the visibility test")
    sp.set_defaults(func=cmd_navigate)

    sp = sub.add_parser("evaluate", help="score a dataset manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--csv", help="write the per-planner table as CSV")
    sp.add_argument("--bins", type=int, default=0, help="also bin SR by costmap quality")
    add_camera(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("render", help="draw a costmap (and path) to .ppm or .svg")
    sp.add_argument("--map", required=True, help="costmap text file")
    sp.add_argument("--path", help="path CSV to overlay")
    sp.add_argument("--out", required=True)
    sp.add_argument("--scale", type=int, default=4)
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(json.dumps({"error": "ParseError", "message": str(e), "offset": e.offset}),
              file=sys.stderr)
        return 2
    except WheelplanError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    except OSError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
