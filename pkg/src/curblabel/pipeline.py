"""End-to-end composition: project -> mask -> lift per scan, then reconstruct,
annotate and export."""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import openlabel
from .annotate import AnnotateParams, CurbAnnotator
from .bev import GridConfig, project
from .core import read_poses, read_scan_bin
from .detect import FileMaskSource, HeuristicMaskSource, OracleMaskSource, ProbMaskSource
from .exceptions import CurbLabelError, ValidationError
from .lift import DEFAULT_Z_MAX, lift_mask
from .sequence import reconstruct

log = logging.getLogger(__name__)

MASK_KINDS = ("file", "oracle", "heuristic", "prob")


class StageError(CurbLabelError):
    """Failure inside one pipeline stage, tagged with stage and scan index."""

    def __init__(self, stage, scan_index, cause):
        where = f"stage {stage}" + (f", scan {scan_index}" if scan_index is not None else "")
        super().__init__(f"{where}: {cause}")
        self.stage = stage
        self.scan_index = scan_index


@dataclass
class MaskSourceConfig:
    kind: str = "oracle"
    pattern: str = None
    gt: str = None
    grad_min: float = 0.03
    grad_max: float = 0.14
    threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ValidationError(f"mask source must be one of {MASK_KINDS}, got {self.kind!r}")

    def build(self, poses):
        if self.kind == "file":
            return FileMaskSource(self._need("pattern"))
        if self.kind == "prob":
            return ProbMaskSource(self._need("pattern"), self.threshold)
        if self.kind == "heuristic":
            return HeuristicMaskSource(self.grad_min, self.grad_max)
        return OracleMaskSource(openlabel.read(self._need("gt")), tuple(poses))

    def _need(self, name):
        value = getattr(self, name)
        if value is None:
            raise ValidationError(f"mask source {self.kind!r} needs {name!r}")
        return value


@dataclass
class PipelineConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    mask_source: MaskSourceConfig = field(default_factory=MaskSourceConfig)
    z_max: float = DEFAULT_Z_MAX
    annotate: AnnotateParams = field(default_factory=AnnotateParams)
    scans: str = None
    poses: str = None
    out: str = None
    workers: int = 1

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "grid" in d:
            d["grid"] = GridConfig.from_dict(d["grid"])
        if "mask_source" in d:
            d["mask_source"] = MaskSourceConfig(**d["mask_source"])
        if "annotate" in d:
            d["annotate"] = AnnotateParams.from_dict(d["annotate"])
        return cls(**d)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class RunSummary:
    scans: int = 0
    curb_points: int = 0
    clusters_kept: int = 0
    clusters_dropped: int = 0
    polylines: int = 0

    def __str__(self):
        return (f"scans processed: {self.scans}, curb points lifted: {self.curb_points}, "
                f"clusters kept: {self.clusters_kept}, clusters dropped: {self.clusters_dropped}, "
                f"polylines emitted: {self.polylines}")


def lift_scan(scan, grid, source, z_max):
    """Per-scan stages; top level so worker processes can run it."""
    stage = "project"
    try:
        bev, index = project(scan, grid)
        stage = "mask"
        mask = source(scan.scan_index, bev)
        stage = "lift"
        return lift_mask(scan, index, mask, z_max)
    except Exception as exc:
        raise StageError(stage, scan.scan_index, exc) from exc


def _lift_job(args):
    item, grid, source, z_max = args
    if isinstance(item, tuple):
        path, scan_index = item
        try:
            item = read_scan_bin(path, scan_index)
        except Exception as exc:
            raise StageError("read", scan_index, exc) from exc
    return lift_scan(item, grid, source, z_max)


def lift_all(scans, grid, source, z_max, workers=1):
    """Lift every scan; ``scans`` holds Scan objects or ``(path, index)`` pairs.

    Results come back in scan order whatever the worker count.
    """
    jobs = [(s, grid, source, z_max) for s in scans]
    if workers <= 1 or len(jobs) <= 1:
        return [_lift_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_lift_job, jobs))


def annotate_cloud(cloud, params):
    try:
        est = CurbAnnotator.from_params(params).fit(cloud)
    except Exception as exc:
        raise StageError("annotate", None, exc) from exc
    return est


def run(config):
    """Execute the whole pipeline and write the OpenLABEL file. Returns (CurbSet, RunSummary)."""
    scans_dir = Path(config.scans)
    if not scans_dir.is_dir():
        raise FileNotFoundError(f"scans directory not found: {scans_dir}")
    poses = read_poses(config.poses)
    files = sorted(scans_dir.glob("*.bin"))
    summary = RunSummary(scans=len(files))
    if not files:
        log.warning("no scans found in %s; writing an empty annotation file", scans_dir)
    elif len(files) > len(poses):
        raise StageError("read", len(poses), f"{len(files)} scans but only {len(poses)} poses")
    source = config.mask_source.build(poses)
    curb_points = lift_all([(f, i) for i, f in enumerate(files)], config.grid, source,
                           config.z_max, config.workers)
    summary.curb_points = sum(len(c) for c in curb_points)
    try:
        cloud = reconstruct(curb_points, poses)
    except Exception as exc:
        raise StageError("reconstruct", None, exc) from exc
    est = annotate_cloud(cloud, config.annotate)
    s = est.summary_
    summary.clusters_kept = s.n_clusters - s.n_small_clusters - s.n_collapsed
    summary.clusters_dropped = s.n_small_clusters + s.n_collapsed
    summary.polylines = s.n_polylines
    if config.out is not None:
        openlabel.write(est.curbs_, config.out)
    return est.curbs_, summary
