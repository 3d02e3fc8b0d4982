"""Point-cloud and pose types, rigid transforms and KITTI-style ingestion.

Frames follow the KITTI/Velodyne convention: x forward, y left, z up, origin
at the sensor.  A :class:`Pose` maps ego (sensor) coordinates of one scan into
the common world frame of the sequence.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._validation import check_points
from .exceptions import ContractError, FormatError, ValidationError

RECORD_BYTES = 16
ORTHO_FIX_TOL = 1e-6
ORTHO_REJECT_TOL = 1e-3


class Point3(NamedTuple):
    id: int
    x: float
    y: float
    z: float
    intensity: float = 0.0


@dataclass(frozen=True, eq=False)
class Scan:
    """One LiDAR sweep. Point ids are row positions in ``xyz``."""

    xyz: np.ndarray
    intensity: np.ndarray = None
    scan_index: int = 0

    def __post_init__(self):
        xyz = check_points(self.xyz, name="scan points")
        if self.intensity is None:
            intensity = np.zeros(len(xyz))
        else:
            intensity = np.asarray(self.intensity, dtype=np.float64).reshape(-1)
            if intensity.shape[0] != xyz.shape[0]:
                raise ValidationError("intensity length does not match point count")
        if self.scan_index < 0:
            raise ValidationError(f"scan_index must be >= 0, got {self.scan_index}")
        xyz.setflags(write=False)
        intensity.setflags(write=False)
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "scan_index", int(self.scan_index))

    def __len__(self):
        return self.xyz.shape[0]

    def __iter__(self):
        for i, (p, w) in enumerate(zip(self.xyz, self.intensity)):
            yield Point3(i, float(p[0]), float(p[1]), float(p[2]), float(w))

    @property
    def ids(self):
        return np.arange(len(self), dtype=np.int64)

    def point(self, i):
        p = self.xyz[i]
        return Point3(int(i), float(p[0]), float(p[1]), float(p[2]), float(self.intensity[i]))


def orthonormality_error(rotation):
    """Largest absolute entry of ``R^T R - I``."""
    R = np.asarray(rotation, dtype=np.float64)
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def nearest_rotation(rotation):
    """Project a 3x3 matrix onto SO(3) (polar decomposition via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(rotation, dtype=np.float64))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform ``p_world = rotation @ p_ego + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64)
        t = np.array(self.translation, dtype=np.float64).reshape(-1)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValidationError(f"pose needs a 3x3 rotation and 3-vector, got {R.shape}, {t.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(t))):
            raise ValidationError("pose entries must be finite")
        err = orthonormality_error(R)
        if err > ORTHO_FIX_TOL:
            raise ValidationError(f"rotation is not orthonormal (error {err:.3g})")
        if np.linalg.det(R) <= 0:
            raise ValidationError("rotation has negative determinant")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix):
        """Build from a 3x4 ``[R | t]`` or 4x4 homogeneous matrix."""
        M = np.asarray(matrix, dtype=np.float64)
        return cls(M[:3, :3], M[:3, 3])

    @classmethod
    def from_yaw(cls, yaw, translation=(0.0, 0.0, 0.0)):
        c, s = np.cos(yaw), np.sin(yaw)
        return cls(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]), translation)

    def as_matrix(self):
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    def inverse(self):
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    def allclose(self, other, atol=1e-9):
        return (np.allclose(self.rotation, other.rotation, rtol=0, atol=atol)
                and np.allclose(self.translation, other.translation, rtol=0, atol=atol))


@dataclass(frozen=True, eq=False)
class Sequence:
    scans: list
    poses: list

    def __post_init__(self):
        if len(self.scans) != len(self.poses):
            raise ContractError(f"{len(self.scans)} scans but {len(self.poses)} poses")
        for i, scan in enumerate(self.scans):
            if scan.scan_index != i:
                raise ContractError(f"scan at position {i} has scan_index {scan.scan_index}")
        object.__setattr__(self, "scans", list(self.scans))
        object.__setattr__(self, "poses", list(self.poses))

    def __len__(self):
        return len(self.scans)


def transform_points(points, pose):
    """Apply ``pose`` to an (n, 3) array; row order (and so ids) is kept."""
    P = check_points(points)
    return P @ pose.rotation.T + pose.translation


def compose(a, b):
    """Pose equivalent to applying ``b`` first, then ``a``."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def read_scan_bin(path, scan_index=0):
    """Decode a file of little-endian float32 (x, y, z, intensity) records."""
    raw = Path(path).read_bytes()
    if len(raw) % RECORD_BYTES:
        raise FormatError(f"{path}: {len(raw)} bytes is not a multiple of {RECORD_BYTES}")
    records = np.frombuffer(raw, dtype="<f4").reshape(-1, 4).astype(np.float64)
    bad = ~np.all(np.isfinite(records[:, :3]), axis=1)
    if bad.any():
        raise FormatError(f"{path}: non-finite coordinate at point {int(np.flatnonzero(bad)[0])}")
    intensity = np.nan_to_num(records[:, 3], nan=0.0)
    return Scan(records[:, :3], np.clip(intensity, 0.0, 1.0), scan_index)


def write_scan_bin(scan, path):
    records = np.empty((len(scan), 4), dtype="<f4")
    records[:, :3] = scan.xyz
    records[:, 3] = scan.intensity
    Path(path).write_bytes(records.tobytes())


def read_poses(path):
    """Read a KITTI odometry pose file: one row-major 3x4 ``[R | t]`` per line.

    Rotations off by more than 1e-6 but less than 1e-3 are snapped to the
    nearest rotation; anything worse is rejected.
    """
    poses = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                values = [float(v) for v in line.split()]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if len(values) != 12:
                raise FormatError(f"{path}:{lineno}: expected 12 numbers, got {len(values)}")
            M = np.array(values).reshape(3, 4)
            if not np.all(np.isfinite(M)):
                raise FormatError(f"{path}:{lineno}: non-finite value")
            R = M[:, :3]
            err = orthonormality_error(R)
            if err >= ORTHO_REJECT_TOL or np.linalg.det(R) <= 0:
                raise ValidationError(f"{path}:{lineno}: rotation is not a rotation (error {err:.3g})")
            if err > ORTHO_FIX_TOL:
                R = nearest_rotation(R)
            poses.append(Pose(R, M[:, 3]))
    return poses


def write_poses(poses, path):
    with open(path, "w", encoding="utf-8") as fh:
        for pose in poses:
            M = np.hstack([pose.rotation, pose.translation[:, None]])
            fh.write(" ".join(repr(float(v)) for v in M.reshape(-1)) + "\n")


def read_sequence(scans_dir, poses_path):
    """Load ``*.bin`` scans (sorted by name) and their poses."""
    poses = read_poses(poses_path)
    files = sorted(Path(scans_dir).glob("*.bin"))
    if len(files) != len(poses):
        raise ContractError(f"{scans_dir} holds {len(files)} scans but {poses_path} has {len(poses)} poses")
    scans = [read_scan_bin(f, scan_index=i) for i, f in enumerate(files)]
    return Sequence(scans, poses)
