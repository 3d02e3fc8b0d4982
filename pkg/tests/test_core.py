import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_rotation
from curblabel.core import (Pose, Scan, Sequence, compose, read_poses, read_scan_bin, read_sequence,
                            transform_points, write_poses, write_scan_bin)
from curblabel.exceptions import ContractError, FormatError, ValidationError


def test_read_scan_two_records(tmp_path):
    path = tmp_path / "s.bin"
    path.write_bytes(struct.pack("<8f", 1.0, 2.0, 0.5, 0.3, 0.0, 0.0, 0.0, 0.0))
    scan = read_scan_bin(path)
    assert len(scan) == 2
    assert [p.id for p in scan] == [0, 1]
    p0 = scan.point(0)
    assert (p0.x, p0.y, p0.z) == (1.0, 2.0, 0.5)
    assert p0.intensity == pytest.approx(0.3)


def test_read_scan_empty(tmp_path):
    path = tmp_path / "e.bin"
    path.write_bytes(b"")
    assert len(read_scan_bin(path)) == 0


def test_read_scan_bad_length(tmp_path):
    path = tmp_path / "b.bin"
    path.write_bytes(b"\0" * 17)
    with pytest.raises(FormatError, match="17 bytes"):
        read_scan_bin(path)


def test_read_scan_non_finite_names_point(tmp_path):
    path = tmp_path / "n.bin"
    path.write_bytes(struct.pack("<8f", 0, 0, 0, 0, 1, float("nan"), 0, 0))
    with pytest.raises(FormatError, match="point 1"):
        read_scan_bin(path)


def test_intensity_is_clamped(tmp_path):
    path = tmp_path / "i.bin"
    path.write_bytes(struct.pack("<8f", 0, 0, 0, 2.5, 0, 0, 0, -1))
    assert read_scan_bin(path).intensity.tolist() == [1.0, 0.0]


def test_scan_bin_round_trip_is_byte_identical(tmp_path, rng):
    records = rng.normal(size=(500, 4)).astype("<f4")
    records[:, 3] = rng.uniform(size=500)
    src = tmp_path / "a.bin"
    src.write_bytes(records.tobytes())
    dst = tmp_path / "b.bin"
    write_scan_bin(read_scan_bin(src), dst)
    assert src.read_bytes() == dst.read_bytes()


def test_read_poses_identity_and_translation(tmp_path):
    path = tmp_path / "poses.txt"
    path.write_text("1 0 0 0 0 1 0 0 0 0 1 0\n\n1 0 0 5 0 1 0 -2 0 0 1 0.1\n")
    a, b = read_poses(path)
    assert a == Pose.identity()
    np.testing.assert_array_equal(b.rotation, np.eye(3))
    np.testing.assert_array_equal(b.translation, [5, -2, 0.1])


def test_read_poses_arity_error_names_line(tmp_path):
    path = tmp_path / "poses.txt"
    path.write_text("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1\n")
    with pytest.raises(FormatError, match=":2:"):
        read_poses(path)


def test_read_poses_snaps_small_rotation_error(tmp_path):
    R = np.eye(3) + 5e-5 * np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
    path = tmp_path / "poses.txt"
    path.write_text(" ".join(repr(float(v)) for v in np.hstack([R, np.zeros((3, 1))]).ravel()) + "\n")
    (pose,) = read_poses(path)
    assert np.abs(pose.rotation.T @ pose.rotation - np.eye(3)).max() < 1e-12
    assert np.linalg.det(pose.rotation) == pytest.approx(1.0)


def test_read_poses_rejects_large_rotation_error(tmp_path):
    path = tmp_path / "poses.txt"
    path.write_text("1.01 0 0 0 0 1 0 0 0 0 1 0\n")
    with pytest.raises(ValidationError):
        read_poses(path)


def test_pose_round_trip(tmp_path, rng):
    poses = [Pose(random_rotation(rng), rng.normal(size=3) * 10) for _ in range(5)]
    path = tmp_path / "p.txt"
    write_poses(poses, path)
    assert read_poses(path) == poses


def test_pose_rejects_reflection():
    with pytest.raises(ValidationError):
        Pose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))


def test_transform_examples():
    pts = np.array([[1.0, 2.0, 3.0], [-4.0, 0.5, 0.0]])
    np.testing.assert_array_equal(transform_points(pts, Pose.identity()), pts)
    np.testing.assert_array_equal(transform_points([[0, 0, 0]], Pose(np.eye(3), [1, 0, 0])), [[1, 0, 0]])
    out = transform_points([[1.0, 0.0, 0.0]], Pose.from_yaw(math.pi / 2))
    np.testing.assert_allclose(out, [[0, 1, 0]], atol=1e-12)


def test_compose_examples(rng):
    P = Pose(random_rotation(rng), rng.normal(size=3))
    assert compose(Pose.identity(), P).allclose(P, atol=0)
    assert compose(P, P.inverse()).allclose(Pose.identity(), atol=1e-9)
    t = compose(Pose(np.eye(3), [1, 0, 0]), Pose(np.eye(3), [0, 2, 0]))
    np.testing.assert_array_equal(t.translation, [1, 2, 0])


def test_compose_applies_b_then_a(rng):
    a = Pose(random_rotation(rng), rng.normal(size=3))
    b = Pose(random_rotation(rng), rng.normal(size=3))
    p = rng.normal(size=(10, 3))
    np.testing.assert_allclose(transform_points(p, compose(a, b)),
                               transform_points(transform_points(p, b), a), atol=1e-12)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_transform_is_isometry(seed):
    rng = np.random.default_rng(seed)
    pose = Pose(random_rotation(rng), rng.normal(size=3) * 50)
    p = rng.normal(size=(30, 3)) * 20
    q = transform_points(p, pose)
    d0 = np.linalg.norm(p[:, None] - p[None], axis=-1)
    d1 = np.linalg.norm(q[:, None] - q[None], axis=-1)
    assert np.abs(d0 - d1).max() <= 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_compose_is_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (Pose(random_rotation(rng), rng.normal(size=3) * 10) for _ in range(3))
    assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), atol=1e-9)


def test_sequence_invariants():
    scans = [Scan(np.zeros((1, 3)), scan_index=0)]
    with pytest.raises(ContractError):
        Sequence(scans, [])
    with pytest.raises(ContractError):
        Sequence([Scan(np.zeros((1, 3)), scan_index=1)], [Pose.identity()])


def test_scan_rejects_non_finite():
    with pytest.raises(ValueError):
        Scan(np.array([[0.0, np.inf, 0.0]]))


def test_read_sequence(tmp_path):
    d = tmp_path / "velodyne"
    d.mkdir()
    for i in range(3):
        write_scan_bin(Scan(np.full((2, 3), float(i)), scan_index=i), d / f"{i:06d}.bin")
    write_poses([Pose.identity()] * 3, tmp_path / "poses.txt")
    seq = read_sequence(d, tmp_path / "poses.txt")
    assert len(seq) == 3
    assert seq.scans[2].xyz[0, 0] == 2.0
    write_poses([Pose.identity()] * 2, tmp_path / "short.txt")
    with pytest.raises(ContractError):
        read_sequence(d, tmp_path / "short.txt")
