"""Synthetic street scenes with known curb geometry.

The world frame has the road surface at z = 0.  The ego vehicle drives along
the road centerline with its sensor ``sensor_height`` above the road, so the
road appears near z = -1.73 m in each scan.  Every scan samples the road, the
sidewalks (raised by ``curb_height``) and the vertical curb faces between
them, within ``view_radius`` of the sensor.

Ground-truth polylines run along the foot of each curb face, i.e. the line the
minimum-height lift recovers.
"""
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon
from shapely.ops import substring, unary_union

from . import openlabel
from ._validation import check_count, check_positive
from .annotate.types import CurbSet
from .core import Pose, Scan, Sequence, transform_points, write_poses, write_scan_bin
from .exceptions import ValidationError
from .lift import DEFAULT_Z_MAX

LAYOUTS = {"straight": "straight", "curved": "curved", "curved-arc": "curved", "arc": "curved",
           "l": "L", "L": "L", "L-intersection": "L", "l-intersection": "L"}
FACE_FRACTION = 0.15
MAX_SAGITTA = 0.005


@dataclass(frozen=True)
class SceneSpec:
    layout: str = "straight"
    length: float = 60.0
    curb_offset: float = 3.5
    curb_height: float = 0.10
    scan_count: int = 50
    points_per_scan: int = 20000
    noise_sigma: float = 0.01
    occlusion_fraction: float = 0.0
    seed: int = 0
    radius: float = 30.0
    sidewalk_width: float = 3.0
    view_radius: float = 20.0
    occlusion_run: float = 0.3
    occlusion_band: float = 0.3
    sensor_height: float = 1.73

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ValidationError(f"unknown layout {self.layout!r}; choose from straight, curved, L")
        object.__setattr__(self, "layout", LAYOUTS[self.layout])
        for name in ("length", "curb_offset", "curb_height", "radius", "sidewalk_width",
                     "view_radius", "occlusion_run", "occlusion_band", "sensor_height"):
            check_positive(getattr(self, name), name)
        check_positive(self.noise_sigma, "noise_sigma", strict=False)
        check_count(self.scan_count, "scan_count")
        check_count(self.points_per_scan, "points_per_scan")
        if not self.curb_height < DEFAULT_Z_MAX:
            raise ValidationError(f"curb_height must be < {DEFAULT_Z_MAX} m, got {self.curb_height}")
        if not 0 <= self.occlusion_fraction <= 1:
            raise ValidationError(f"occlusion_fraction must lie in [0, 1], got {self.occlusion_fraction}")
        if self.layout == "curved" and self.radius <= self.curb_offset + self.sidewalk_width:
            raise ValidationError("radius must exceed curb_offset + sidewalk_width")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


# -- layouts ---------------------------------------------------------------

def _densify(corners, spacing=1.0):
    out = [np.asarray(corners[0], dtype=np.float64)]
    for a, b in zip(corners[:-1], corners[1:]):
        a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
        n = max(1, math.ceil(np.linalg.norm(b - a) / spacing))
        out.extend(a + (b - a) * (k / n) for k in range(1, n + 1))
    return np.array(out)


def offset_curve(spec, lateral):
    """Curve at signed lateral offset (positive = left of travel) as xy vertices."""
    L = spec.length
    if spec.layout == "straight":
        return _densify([(0.0, lateral), (L, lateral)])
    if spec.layout == "curved":
        R = spec.radius
        r = R - lateral
        total = L / R
        dtheta = 2 * math.acos(1 - MAX_SAGITTA / (R + abs(lateral)))
        theta = np.linspace(0.0, total, math.ceil(total / dtheta) + 1)
        return np.column_stack([r * np.sin(theta), R - r * np.cos(theta)])
    half = L / 2
    return _densify([(0.0, lateral), (half - lateral, lateral), (half - lateral, half)])


def centerline_pose(spec, s):
    """Sensor pose at arc length ``s`` along the centerline."""
    if spec.layout == "straight":
        x, y, yaw = s, 0.0, 0.0
    elif spec.layout == "curved":
        R = spec.radius
        x, y, yaw = R * math.sin(s / R), R - R * math.cos(s / R), s / R
    else:
        half = spec.length / 2
        if s <= half:
            x, y, yaw = s, 0.0, 0.0
        else:
            x, y, yaw = half, s - half, math.pi / 2
    return Pose.from_yaw(yaw, (x, y, spec.sensor_height))


def _band_polygon(spec, left, right):
    a, b = offset_curve(spec, left), offset_curve(spec, right)
    return Polygon(np.vstack([a, b[::-1]]))


def ground_truth(spec):
    """Curb foot polylines in the world frame: left curb id 0, right curb id 1."""
    curbs = []
    for lateral in (spec.curb_offset, -spec.curb_offset):
        xy = offset_curve(spec, lateral)
        curbs.append(np.column_stack([xy, np.zeros(len(xy))]))
    return CurbSet.from_polylines(curbs)


# -- sampling --------------------------------------------------------------

def _occlusion_runs(spec, length, rng):
    """Occluded [start, end) arc-length intervals along one curb."""
    run = spec.occlusion_run
    k = round(spec.occlusion_fraction * length / run)
    if k == 0:
        return []
    slot = 2 * run if spec.occlusion_fraction <= 0.5 else run
    n_slots = int(length // slot)
    k = min(k, n_slots)
    chosen = np.sort(rng.choice(n_slots, size=k, replace=False))
    return [(i * slot, i * slot + run) for i in chosen.tolist()]


def _in_runs(s, runs):
    hit = np.zeros(len(s), dtype=bool)
    for a, b in runs:
        hit |= (s >= a) & (s < b)
    return hit


class _Scene:
    def __init__(self, spec):
        self.spec = spec
        h = spec.curb_offset + spec.sidewalk_width
        self.road = _band_polygon(spec, spec.curb_offset, -spec.curb_offset)
        self.area = _band_polygon(spec, h, -h)
        shapely.prepare(self.road)
        shapely.prepare(self.area)
        self.gt = ground_truth(spec)
        self.lines = [LineString(c.polyline.vertices[:, :2]) for c in self.gt]
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x0CC1]))
        self.runs = [_occlusion_runs(spec, line.length, rng) for line in self.lines]
        zones = [substring(line, a, b).buffer(spec.occlusion_band, cap_style="flat")
                 for line, runs in zip(self.lines, self.runs) for a, b in runs]
        self.occluders = unary_union(zones) if zones else None
        if self.occluders is not None:
            shapely.prepare(self.occluders)

    def surface_points(self, centre, n, rng):
        spec, got, out = self.spec, 0, []
        for _ in range(1000):
            if got >= n:
                break
            m = 2 * (n - got) + 64
            r = spec.view_radius * np.sqrt(rng.uniform(size=m))
            phi = rng.uniform(0, 2 * np.pi, size=m)
            xy = centre + np.column_stack([r * np.cos(phi), r * np.sin(phi)])
            keep = shapely.contains_xy(self.area, xy[:, 0], xy[:, 1])
            if self.occluders is not None:
                keep &= ~shapely.contains_xy(self.occluders, xy[:, 0], xy[:, 1])
            xy = xy[keep]
            z = np.where(shapely.contains_xy(self.road, xy[:, 0], xy[:, 1]), 0.0, spec.curb_height)
            out.append(np.column_stack([xy, z]))
            got += len(xy)
        pts = np.vstack(out) if out else np.zeros((0, 3))
        return pts[:n]

    def face_points(self, centre, n, rng):
        spec = self.spec
        per_curb = [n // 2, n - n // 2]
        out = []
        for line, runs, want in zip(self.lines, self.runs, per_curb):
            got, chunks = 0, []
            for _ in range(1000):
                if got >= want:
                    break
                m = 4 * (want - got) + 64
                s = rng.uniform(0, line.length, size=m)
                s = s[~_in_runs(s, runs)]
                xy = shapely.get_coordinates(shapely.line_interpolate_point(line, s))
                near = np.linalg.norm(xy - centre, axis=1) <= spec.view_radius
                xy = xy[near]
                z = rng.uniform(0, spec.curb_height, size=len(xy))
                chunks.append(np.column_stack([xy, z]))
                got += len(xy)
            if chunks:
                out.append(np.vstack(chunks)[:want])
        return np.vstack(out) if out else np.zeros((0, 3))


def scan_positions(spec):
    if spec.scan_count == 1:
        return [0.0]
    return [spec.length * i / (spec.scan_count - 1) for i in range(spec.scan_count)]


def generate_scene(spec):
    """Return ``(Sequence, CurbSet)``; ground truth is in the world frame.

    Coordinates are rounded to float32 so that a scene written to disk reads
    back identically.
    """
    scene = _Scene(spec)
    root = np.random.SeedSequence([spec.seed, 0x5CA7])
    scans, poses = [], []
    n_face = round(FACE_FRACTION * spec.points_per_scan)
    for i, (s, seed) in enumerate(zip(scan_positions(spec), root.spawn(spec.scan_count))):
        rng = np.random.default_rng(seed)
        pose = centerline_pose(spec, s)
        centre = pose.translation[:2]
        world = np.vstack([scene.surface_points(centre, spec.points_per_scan - n_face, rng),
                           scene.face_points(centre, n_face, rng)])
        world = world[rng.permutation(len(world))]
        if spec.noise_sigma > 0:
            world = world + rng.normal(0.0, spec.noise_sigma, size=world.shape)
        ego = transform_points(world, pose.inverse()).astype(np.float32).astype(np.float64)
        intensity = rng.uniform(size=len(ego)).astype(np.float32).astype(np.float64)
        scans.append(Scan(ego, intensity, i))
        poses.append(pose)
    return Sequence(scans, poses), scene.gt


def write_scene(sequence, gt, out_dir):
    """Write ``velodyne/NNNNNN.bin``, ``poses.txt`` and ``gt.json`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "velodyne").mkdir(parents=True, exist_ok=True)
    for scan in sequence.scans:
        write_scan_bin(scan, out / "velodyne" / f"{scan.scan_index:06d}.bin")
    write_poses(sequence.poses, out / "poses.txt")
    openlabel.write(gt, out / "gt.json", annotator="synth")
    return out


def with_overrides(spec, **kwargs):
    return replace(spec, **{k: v for k, v in kwargs.items() if v is not None})
