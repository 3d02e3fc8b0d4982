"""Lift a 2D curb mask back to 3D scan points.

For each curb pixel the candidate points are the scan points binned into that
pixel.  The lowest candidate height is kept when it is below ``z_max``, and
every point attaining that height is emitted.
"""
from dataclasses import dataclass

import numpy as np

from .bev import check_same_grid
from .exceptions import ContractError

DEFAULT_Z_MAX = 0.14


@dataclass(frozen=True, eq=False)
class CurbPoints:
    """Lifted curb points of one scan, ego frame, sorted by point id."""

    scan_index: int
    ids: np.ndarray
    xyz: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        xyz = np.asarray(self.xyz, dtype=np.float64).reshape(-1, 3)
        if len(ids) != len(xyz):
            raise ContractError("ids and xyz lengths differ")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "xyz", xyz)

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, CurbPoints):
            return NotImplemented
        return (self.scan_index == other.scan_index and np.array_equal(self.ids, other.ids)
                and np.array_equal(self.xyz, other.xyz))

    @property
    def entries(self):
        return [(int(i), *map(float, p)) for i, p in zip(self.ids, self.xyz)]

    def save(self, path):
        np.savez(path, scan_index=self.scan_index, ids=self.ids, xyz=self.xyz)

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            return cls(int(data["scan_index"]), data["ids"], data["xyz"])


def lift_mask(scan, index, mask, z_max=DEFAULT_Z_MAX):
    check_same_grid(index.grid, mask.grid, "index/mask grid")
    entry_pixels = index.entry_pixels()
    on_curb = mask.bits.reshape(-1)[entry_pixels]
    pix = entry_pixels[on_curb]
    ids = index.point_ids[on_curb]
    z = index.z[on_curb]
    if len(ids) == 0:
        return CurbPoints(scan.scan_index, ids, np.zeros((0, 3)))

    # entries are grouped by pixel already
    starts = np.flatnonzero(np.r_[True, pix[1:] != pix[:-1]])
    group_min = np.minimum.reduceat(z, starts)
    per_entry_min = np.repeat(group_min, np.diff(np.r_[starts, len(z)]))
    keep = (z == per_entry_min) & (per_entry_min < z_max)
    out = np.sort(ids[keep])
    return CurbPoints(scan.scan_index, out, scan.xyz[out])
