"""Command-line front end.

    disttopo build MAP|CHECKPOINT --out DIR
    disttopo simulate MAP TRAJECTORY --out LOG
    disttopo replay LOG --out DIR [--map MAP] [--snapshot-every N]
    disttopo compare GRAPH_A GRAPH_B [--region x0,y0,x1,y1]
    disttopo render CHECKPOINT --out DIR
    disttopo fixture {house,house-block,corridor} --out DIR
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .config import RunConfig, UpdateSchedule, load_config
from .distance import Rect, reframe
from .engine import IncrementalEngine, load_checkpoint
from .graph import TopoGraph
from .grid import load_grid, read_metadata, save_grid, sidecar_path
from .metrics import Region, vertex_error
from .pipeline import BatchResult, batch_from_grid, batch_from_obstacles
from .rasterio import write_dmap, write_pbm
from .render import render_distance, render_graph, render_skeleton, render_snapshot
from .sim import SensorSpec, iter_log, read_trajectory, simulate_frames, write_log, write_trajectory


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--sigma", type=float, help="Gaussian sigma in pixels")
    p.add_argument("--threshold", type=float, dest="binarize_threshold", help="ridge binarization threshold")
    p.add_argument("--scale", type=float, dest="laplacian_scale", help="distance-map scale before the Laplacian")
    p.add_argument("--schedule", type=UpdateSchedule.parse, help="update periods d,s,g in frames")
    p.add_argument("--outlier-threshold", type=float, help="vertex error outlier cutoff in pixels")
    p.add_argument("--layer-width", type=int, dest="protected_layer_width", help="protected ring width in pixels")
    p.add_argument("--connect-radius", type=float, help="seam connection radius in pixels")
    p.add_argument("--stencil", type=int, choices=(4, 8), help="Laplacian stencil")
    p.add_argument("--resolution", type=float, help="meters per pixel for scan projection")
    return p


_CONFIG_KEYS = ("sigma", "binarize_threshold", "laplacian_scale", "schedule", "outlier_threshold",
                "protected_layer_width", "connect_radius", "stencil", "resolution")


def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config, {k: getattr(args, k, None) for k in _CONFIG_KEYS})


def _write_batch(out: Path, result: BatchResult) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "distance.dmap": lambda p: write_dmap(p, result.dm),
        "distance.png": lambda p: render_distance(p, result.dm),
        "skeleton.pbm": lambda p: write_pbm(p, result.skeleton, result.dm.origin),
        "skeleton.png": lambda p: render_skeleton(p, result.dm, result.skeleton, result.dm.bounds),
        "graph.json": lambda p: result.graph.save(p),
        "graph.dot": lambda p: p.write_text(result.graph.to_dot()),
        "graph.png": lambda p: render_graph(p, result.dm, result.graph),
    }
    for name, write in files.items():
        write(out / name)
    return [out / name for name in files]


def cmd_build(args: argparse.Namespace) -> int:
    cfg = _config(args)
    src = Path(args.map)
    if src.is_dir():
        # a replay checkpoint: rebuild from its accumulated obstacles on its canvas
        ck = load_checkpoint(src)
        dm = ck.distance
        rows, cols = np.nonzero(ck.obstacles)
        obstacles = np.stack([cols + dm.origin.col, rows + dm.origin.row], axis=1)
        result = batch_from_obstacles(obstacles, dm.bounds, cfg) if not dm.bounds.empty else None
        if result is None:
            raise ValueError(f"{src}: checkpoint holds no obstacles")
    else:
        result = batch_from_grid(load_grid(src), cfg)
    _write_batch(Path(args.out), result)
    g = result.graph
    if not g.vertices:
        print("warning: empty skeleton, graph has no vertices", file=sys.stderr)
    print(f"graph: {len(g.vertices)} vertices, {len(g.edges)} edges, length {g.total_length():.1f} px")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    grid = load_grid(args.map)
    traj = read_trajectory(args.trajectory)
    spec = SensorSpec(args.beams, math.radians(args.fov), args.range_max, args.noise_std, args.noise_mean)
    frames = simulate_frames(grid, traj, spec, args.seed)
    write_log(args.out, frames)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def _print_timing(stats: dict) -> None:
    print(f"{'loop':<10}{'count':>7}{'min ms':>10}{'mean ms':>10}{'max ms':>10}")
    for name, s in stats.items():
        if s["count"]:
            print(f"{name:<10}{s['count']:>7}{s['min_ms']:>10.2f}{s['mean_ms']:>10.2f}{s['max_ms']:>10.2f}")
        else:
            print(f"{name:<10}{0:>7}{'-':>10}{'-':>10}{'-':>10}")


def cmd_replay(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.map:
        meta = read_metadata(sidecar_path(args.map)) if sidecar_path(args.map).exists() else None
        if meta is not None and args.resolution is None:
            cfg = cfg.replace(resolution=meta.resolution, origin_x=meta.origin_x, origin_y=meta.origin_y)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snaps = out / "snapshots"
    n_snap = 0
    with IncrementalEngine(cfg, pipelined=args.pipelined) as eng:
        for frame in iter_log(args.log):
            eng.ingest(frame)
            if args.snapshot_every and eng.frame_count % args.snapshot_every == 0:
                eng.sync()
                snaps.mkdir(exist_ok=True)
                if not eng.global_dm.bounds.empty:
                    render_snapshot(snaps / f"frame_{eng.frame_count:06d}.png", eng.global_dm, eng.global_skeleton,
                                    eng.skeleton_canvas, eng.global_graph, eng.sk_dirty, eng.skeleton_canvas)
                    n_snap += 1
        eng.finish()
        eng.save_checkpoint(out / "checkpoint")
        eng.global_graph.save(out / "graph.json")
        stats = eng.timing_stats()
        dangling = sum(len(r.dangling) for r in eng.graph_reports)
    (out / "timing.json").write_text(json.dumps(stats, indent=1) + "\n")
    print(f"replayed {eng.frame_count} frames; graph: {len(eng.global_graph.vertices)} vertices, "
          f"{len(eng.global_graph.edges)} edges; {n_snap} snapshots; {dangling} dangling seam ends")
    _print_timing(stats)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _config(args)
    a, b = TopoGraph.load(args.graph_a), TopoGraph.load(args.graph_b)
    region = Region.parse(args.region) if args.region else None
    report = vertex_error(a, b, cfg.outlier_threshold, region, args.method)
    sys.stdout.write(report.table())
    if args.out:
        Path(args.out).write_text(report.to_json())
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    ck = load_checkpoint(args.checkpoint)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dm = ck.distance
    if dm.bounds.empty:
        raise ValueError("checkpoint has an empty distance map; nothing to render")
    sk_canvas = Rect(ck.skeleton_origin.col, ck.skeleton_origin.row, ck.skeleton.shape[1], ck.skeleton.shape[0])
    render_distance(out / "distance.png", dm)
    render_skeleton(out / "skeleton.png", dm, reframe(ck.skeleton, sk_canvas, dm.bounds, False), dm.bounds)
    render_graph(out / "graph.png", dm, ck.graph)
    render_snapshot(out / "overview.png", dm, ck.skeleton, sk_canvas, ck.graph, ck.sk_dirty, sk_canvas)
    print(f"rendered {args.checkpoint} into {out}")
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.name == "corridor":
        save_grid(fixtures.corridor_grid(args.width), out / "corridor.png")
        print(f"wrote {out / 'corridor.png'}")
        return 0
    fx = fixtures.house() if args.name == "house" else fixtures.house_block()
    stem = args.name.replace("-", "_")
    save_grid(fx.grid, out / f"{stem}.png")
    write_trajectory(out / f"{stem}.traj", fx.trajectory)
    cfg = RunConfig(sigma=8.0, resolution=fx.resolution)
    (out / f"{stem}.cfg").write_text(cfg.to_text())
    r = fx.interior
    (out / f"{stem}.region").write_text(f"{r.x0:g},{r.y0:g},{r.x1:g},{r.y1:g}\n")
    print(f"wrote {stem}.png with .meta, .traj, .cfg and .region files to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="disttopo", description="Topology graphs from occupancy grids.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _config_parent()

    p = sub.add_parser("build", parents=[common], help="batch distance map, skeleton and graph")
    p.add_argument("map", help="grayscale map image or replay checkpoint directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="raycast a trajectory into a frame log")
    p.add_argument("map")
    p.add_argument("trajectory")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beams", type=int, default=360)
    p.add_argument("--fov", type=float, default=360.0, help="degrees")
    p.add_argument("--range-max", type=float, default=8.0)
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--noise-mean", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", parents=[common], help="incremental replay of a frame log")
    p.add_argument("log")
    p.add_argument("--out", required=True)
    p.add_argument("--map", help="map whose metadata supplies resolution and origin")
    p.add_argument("--snapshot-every", type=int, default=0)
    p.add_argument("--pipelined", action="store_true", help="run skeleton and graph loops on a worker thread")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("compare", parents=[common], help="vertex error of graph A against reference B")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.add_argument("--region", help="x0,y0,x1,y1 inclusive pixel box")
    p.add_argument("--method", choices=("brute", "kdtree"), default="brute")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("render", help="PNG renders of a replay checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("fixture", help="write a synthetic map with trajectory and config")
    p.add_argument("name", choices=("house", "house-block", "corridor"))
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=9, help="corridor free width in pixels")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"disttopo {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
