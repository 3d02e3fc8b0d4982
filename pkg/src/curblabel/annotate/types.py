from dataclasses import dataclass, field, fields

import numpy as np

from .._validation import check_count, check_points, check_positive
from ..exceptions import ValidationError

MIN_VERTEX_GAP = 1e-9


@dataclass(frozen=True)
class AnnotateParams:
    """Tunables for voxel subsampling, DBSCAN, skeleton and RDP stages (meters)."""

    voxel_size: float = 0.15
    dbscan_eps: float = 0.5
    dbscan_min_pts: int = 5
    min_cluster_points: int = 10
    skeleton_voxel: float = 0.2
    prune_len: float = 1.0
    rdp_epsilon: float = 0.05

    def __post_init__(self):
        for name in ("voxel_size", "dbscan_eps", "skeleton_voxel", "prune_len", "rdp_epsilon"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        object.__setattr__(self, "dbscan_min_pts", check_count(self.dbscan_min_pts, "dbscan_min_pts", minimum=2))
        object.__setattr__(self, "min_cluster_points",
                           check_count(self.min_cluster_points, "min_cluster_points", minimum=1))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValidationError(f"unknown annotate parameters: {sorted(unknown)}")
        return cls(**d)


class Polyline3D:
    """Ordered chain of >= 2 vertices; consecutive vertices must differ."""

    __slots__ = ("_v",)

    def __init__(self, vertices):
        v = check_points(vertices, name="polyline vertices").copy()
        if len(v) < 2:
            raise ValidationError(f"a polyline needs at least 2 vertices, got {len(v)}")
        gaps = np.linalg.norm(np.diff(v, axis=0), axis=1)
        if np.any(gaps < MIN_VERTEX_GAP):
            raise ValidationError(f"consecutive vertices closer than {MIN_VERTEX_GAP} m")
        v.setflags(write=False)
        self._v = v

    @property
    def vertices(self):
        return self._v

    def __len__(self):
        return len(self._v)

    def __eq__(self, other):
        if not isinstance(other, Polyline3D):
            return NotImplemented
        return np.array_equal(self._v, other._v)

    def __hash__(self):
        return hash(self._v.tobytes())

    def __repr__(self):
        return f"Polyline3D({len(self._v)} vertices)"

    def length(self):
        return float(np.linalg.norm(np.diff(self._v, axis=0), axis=1).sum())


@dataclass(frozen=True)
class Curb:
    id: int
    polyline: Polyline3D


@dataclass(frozen=True)
class CurbSet:
    curbs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        curbs = tuple(c if isinstance(c, Curb) else Curb(int(c[0]), c[1]) for c in self.curbs)
        ids = [c.id for c in curbs]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate curb ids in {ids}")
        object.__setattr__(self, "curbs", curbs)

    @classmethod
    def from_polylines(cls, polylines):
        return cls(tuple(Curb(i, p if isinstance(p, Polyline3D) else Polyline3D(p))
                         for i, p in enumerate(polylines)))

    def __len__(self):
        return len(self.curbs)

    def __iter__(self):
        return iter(self.curbs)

    @property
    def polylines(self):
        return [c.polyline for c in self.curbs]

    def transformed(self, pose):
        """Copy with every vertex mapped through ``pose``."""
        from ..core import transform_points

        return CurbSet(tuple(Curb(c.id, Polyline3D(transform_points(c.polyline.vertices, pose)))
                             for c in self.curbs))
