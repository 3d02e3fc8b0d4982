"""Accumulate per-scan curb points into one world-frame cloud."""
from dataclasses import dataclass

import numpy as np

from .core import transform_points
from .exceptions import ContractError, FormatError


@dataclass(frozen=True, eq=False)
class WorldCurbCloud:
    """World-frame points with provenance (source scan index and point id)."""

    xyz: np.ndarray
    scan_index: np.ndarray
    point_id: np.ndarray

    def __post_init__(self):
        xyz = np.asarray(self.xyz, dtype=np.float64).reshape(-1, 3)
        scan_index = np.asarray(self.scan_index, dtype=np.int64).reshape(-1)
        point_id = np.asarray(self.point_id, dtype=np.int64).reshape(-1)
        if not len(xyz) == len(scan_index) == len(point_id):
            raise ContractError("xyz, scan_index and point_id lengths differ")
        if not np.all(np.isfinite(xyz)):
            raise ContractError("world cloud holds non-finite coordinates")
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "scan_index", scan_index)
        object.__setattr__(self, "point_id", point_id)

    def __len__(self):
        return len(self.xyz)

    def __eq__(self, other):
        if not isinstance(other, WorldCurbCloud):
            return NotImplemented
        return (np.array_equal(self.xyz, other.xyz) and np.array_equal(self.scan_index, other.scan_index)
                and np.array_equal(self.point_id, other.point_id))

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros(0, np.int64), np.zeros(0, np.int64))

    def subset(self, mask):
        return WorldCurbCloud(self.xyz[mask], self.scan_index[mask], self.point_id[mask])


def reconstruct(curbs_per_scan, poses):
    """Map each scan's curb points to the world frame and concatenate.

    ``poses`` is a sequence indexed by scan index or a mapping from it.
    """
    parts, scans, ids = [], [], []
    for curb_points in curbs_per_scan:
        k = curb_points.scan_index
        try:
            pose = poses[k]
        except (IndexError, KeyError):
            raise ContractError(f"no pose for scan index {k}") from None
        parts.append(transform_points(curb_points.xyz, pose))
        scans.append(np.full(len(curb_points), k, dtype=np.int64))
        ids.append(curb_points.ids)
    if not parts:
        return WorldCurbCloud.empty()
    return WorldCurbCloud(np.vstack(parts), np.concatenate(scans), np.concatenate(ids))


def write_xyz(cloud, path):
    """One ``x y z scan_index point_id`` line per point, round-trip exact."""
    with open(path, "w", encoding="utf-8") as fh:
        for (x, y, z), s, i in zip(cloud.xyz.tolist(), cloud.scan_index.tolist(), cloud.point_id.tolist()):
            fh.write(f"{x!r} {y!r} {z!r} {s} {i}\n")


def read_xyz(path):
    xyz, scans, ids = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 5:
                raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            try:
                xyz.append([float(v) for v in parts[:3]])
                scans.append(int(parts[3]))
                ids.append(int(parts[4]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    if not xyz:
        return WorldCurbCloud.empty()
    return WorldCurbCloud(np.array(xyz), np.array(scans), np.array(ids))
