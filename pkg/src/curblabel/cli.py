"""``curblabel`` command line.

Subcommands mirror the pipeline stages so each can be run and inspected on
its own; ``run`` chains them.  Flags override values from ``--config``.
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import openlabel
from .annotate import AnnotateParams
from .bev import GridConfig, project
from .core import read_poses, read_scan_bin
from .detect import load_mask
from .exceptions import CurbLabelError
from .lift import CurbPoints
from .metrics import pixel_metrics, polyline_metrics
from .pipeline import MASK_KINDS, PipelineConfig, annotate_cloud, lift_all, reconstruct, run
from .sequence import read_xyz, write_xyz
from .synth import SceneSpec, generate_scene, write_scene

log = logging.getLogger("curblabel")

_ANNOTATE_FLAGS = {
    "voxel_size": float, "dbscan_eps": float, "dbscan_min_pts": int, "min_cluster_points": int,
    "skeleton_voxel": float, "prune_len": float, "rdp_epsilon": float,
}


def _add_pipeline_flags(p, *, io=True):
    p.add_argument("--config", type=Path, help="JSON pipeline configuration")
    if io:
        p.add_argument("--scans", help="directory of *.bin scans")
        p.add_argument("--poses", help="KITTI pose file")
    p.add_argument("--resolution", type=float, help="BEV meters per pixel")
    p.add_argument("--workers", type=int, help="worker processes for per-scan stages")


def _add_mask_flags(p):
    p.add_argument("--mask-source", choices=MASK_KINDS)
    p.add_argument("--mask-pattern", help="mask/probability file pattern, e.g. masks/mask_{:06d}.png")
    p.add_argument("--gt", help="ground-truth OpenLABEL file for the oracle mask source")
    p.add_argument("--grad-min", type=float)
    p.add_argument("--grad-max", type=float)
    p.add_argument("--threshold", type=float, help="probability threshold for --mask-source prob")
    p.add_argument("--z-max", type=float, help="lift height filter in meters (default 0.14)")


def _add_annotate_flags(p):
    for name, typ in _ANNOTATE_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), type=typ, dest=name)


def _config(args):
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    for name in ("scans", "poses", "out", "workers", "z_max"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value if name in ("workers", "z_max") else str(value))
    if getattr(args, "resolution", None) is not None:
        g = cfg.grid
        cfg.grid = replace(g, resolution=args.resolution)
    ms = cfg.mask_source
    for flag, attr in (("mask_source", "kind"), ("mask_pattern", "pattern"), ("gt", "gt"),
                       ("grad_min", "grad_min"), ("grad_max", "grad_max"), ("threshold", "threshold")):
        value = getattr(args, flag, None)
        if value is not None:
            setattr(ms, attr, value)
    ms.__post_init__()
    overrides = {k: getattr(args, k) for k in _ANNOTATE_FLAGS if getattr(args, k, None) is not None}
    if overrides:
        cfg.annotate = AnnotateParams(**{**cfg.annotate.to_dict(), **overrides})
    return cfg


def _require(value, flag):
    if value is None:
        raise CurbLabelError(f"{flag} is required (flag or config)")
    return value


def _scan_files(scans_dir):
    scans_dir = Path(_require(scans_dir, "--scans"))
    if not scans_dir.is_dir():
        raise FileNotFoundError(f"scans directory not found: {scans_dir}")
    return sorted(scans_dir.glob("*.bin"))


def cmd_run(args):
    cfg = _config(args)
    _require(cfg.scans, "--scans")
    _require(cfg.poses, "--poses")
    _require(cfg.out, "--out")
    curbs, summary = run(cfg)
    log.info("%s", summary)
    log.info("wrote %s", cfg.out)
    return 0


def cmd_bev(args):
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, path in enumerate(_scan_files(cfg.scans)):
        bev, index = project(read_scan_bin(path, i), cfg.grid)
        bev.save(out / f"bev_{i:06d}.npz")
        if args.png:
            bev.save_images(out, stem=f"bev_{i:06d}")
        s = bev.summary
        log.info("scan %d: %d points, %d in extent, %d outside slices", i, s.n_points, s.n_in_extent,
                 s.n_out_of_slices)
    return 0


def cmd_lift(args):
    cfg = _config(args)
    files = _scan_files(cfg.scans)
    poses = read_poses(_require(cfg.poses, "--poses"))
    source = cfg.mask_source.build(poses)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = lift_all([(f, i) for i, f in enumerate(files)], cfg.grid, source, cfg.z_max, cfg.workers)
    for cp in results:
        cp.save(out / f"curb_{cp.scan_index:06d}.npz")
    log.info("lifted %d curb points from %d scans", sum(len(c) for c in results), len(results))
    return 0


def cmd_reconstruct(args):
    poses = read_poses(args.poses)
    parts = [CurbPoints.load(p) for p in sorted(Path(args.curbs).glob("curb_*.npz"))]
    cloud = reconstruct(parts, poses)
    write_xyz(cloud, args.out)
    log.info("world curb cloud: %d points -> %s", len(cloud), args.out)
    return 0


def cmd_annotate(args):
    cfg = _config(args)
    est = annotate_cloud(read_xyz(args.cloud), cfg.annotate)
    openlabel.write(est.curbs_, args.out)
    log.info("%s", est.summary_)
    return 0


def _emit(report, out):
    print(report.to_text())
    if out is not None:
        Path(out).write_text(report.to_json() + "\n", encoding="utf-8")


def cmd_eval(args):
    pred = openlabel.read(args.pred)
    gt = openlabel.read(args.gt)
    _emit(polyline_metrics(pred, gt, args.step, args.tolerance), args.out)
    return 0


def cmd_eval_mask(args):
    grid = _config(args).grid
    _emit(pixel_metrics(load_mask(args.pred, grid), load_mask(args.gt, grid), args.tol_px), args.out)
    return 0


def cmd_synth(args):
    values = {k: getattr(args, k) for k in SceneSpec.field_names() if getattr(args, k, None) is not None}
    spec = SceneSpec(**values)
    sequence, gt = generate_scene(spec)
    out = write_scene(sequence, gt, args.out)
    log.info("wrote %d scans, poses and ground truth to %s", len(sequence), out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="curblabel", description="LiDAR curb pre-annotation pipeline")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline: scans + poses -> OpenLABEL polylines")
    _add_pipeline_flags(p)
    _add_mask_flags(p)
    _add_annotate_flags(p)
    p.add_argument("--out", help="output OpenLABEL file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bev", help="project scans to BEV height-map stacks")
    _add_pipeline_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--png", action="store_true", help="also write 8-bit debug images per channel")
    p.set_defaults(func=cmd_bev)

    p = sub.add_parser("lift", help="mask each scan and lift curb pixels to 3D points")
    _add_pipeline_flags(p)
    _add_mask_flags(p)
    p.add_argument("--out", required=True, help="output directory for curb_NNNNNN.npz")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("reconstruct", help="accumulate lifted curb points in the world frame")
    p.add_argument("--curbs", required=True, help="directory written by 'lift'")
    p.add_argument("--poses", required=True)
    p.add_argument("--out", required=True, help="output xyz text file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("annotate", help="world curb cloud -> OpenLABEL polylines")
    p.add_argument("--config", type=Path)
    p.add_argument("--cloud", required=True, help="xyz file written by 'reconstruct'")
    p.add_argument("--out", required=True)
    _add_annotate_flags(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("eval", help="3D polyline precision/recall between two OpenLABEL files")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("eval-mask", help="BEV pixel precision/recall between two mask images")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--tol-px", type=float, default=3)
    p.add_argument("--config", type=Path)
    p.add_argument("--resolution", type=float)
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_eval_mask)

    p = sub.add_parser("synth", help="generate a synthetic street scene")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--layout", choices=["straight", "curved", "L"])
    p.add_argument("--length", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--curb-offset", type=float, dest="curb_offset")
    p.add_argument("--curb-height", type=float, dest="curb_height")
    p.add_argument("--scan-count", type=int, dest="scan_count")
    p.add_argument("--points-per-scan", type=int, dest="points_per_scan")
    p.add_argument("--noise", type=float, dest="noise_sigma")
    p.add_argument("--occlusion", type=float, dest="occlusion_fraction")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        return args.func(args)
    except (CurbLabelError, OSError, json.JSONDecodeError) as exc:
        log.error("%s: %s", args.command, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
