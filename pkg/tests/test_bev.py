import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curblabel.bev import EMPTY, GridConfig, metric_to_pixel, pixel_to_metric, project
from curblabel.core import Scan
from curblabel.exceptions import ValidationError


def test_default_grid(grid):
    assert (grid.height, grid.width) == (512, 512)
    assert grid.n_slices == 6
    assert grid.slice_bounds == (-2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5)


@pytest.mark.parametrize("kwargs", [
    {"resolution": 0}, {"x_range": (1, 1)}, {"slice_bounds": (0.0,)}, {"slice_bounds": (0.0, 0.0)},
])
def test_grid_validation(kwargs):
    with pytest.raises(ValidationError):
        GridConfig(**kwargs)


def test_metric_to_pixel_examples(grid):
    assert metric_to_pixel(-25.6, -25.6, grid) == (0, 0)
    assert metric_to_pixel(-25.6 + 0.25, -25.6, grid)[1] == 2
    assert metric_to_pixel(25.6, 0.0, grid) is None
    assert metric_to_pixel(0.0, 25.6, grid) is None


def test_pixel_to_metric_examples(grid):
    assert pixel_to_metric(0, 0, grid) == pytest.approx((-25.55, -25.55), abs=1e-12)
    assert pixel_to_metric(511, 511, grid) == pytest.approx((25.55, 25.55), abs=1e-12)
    with pytest.raises(IndexError):
        pixel_to_metric(512, 0, grid)


def test_pixel_round_trip(grid):
    for r, c in [(0, 0), (17, 300), (511, 511), (256, 3)]:
        assert metric_to_pixel(*pixel_to_metric(r, c, grid), grid) == (r, c)


@settings(max_examples=200, deadline=None)
@given(st.floats(-25.6, 25.599), st.floats(-25.6, 25.599))
def test_in_extent_point_within_half_cell(x, y):
    grid = GridConfig()
    rc = metric_to_pixel(x, y, grid)
    assert rc is not None
    cx, cy = pixel_to_metric(*rc, grid)
    assert abs(cx - x) <= grid.resolution / 2 + 1e-9
    assert abs(cy - y) <= grid.resolution / 2 + 1e-9


def test_project_single_point(grid):
    bev, index = project(Scan(np.array([[0.0, 0.0, 0.2]])), grid)
    occ = bev.occupied
    assert occ.sum() == 1
    m, r, c = np.argwhere(occ)[0]
    assert bev.channels[m, r, c] == 0.2
    lo, hi = grid.slice_bounds[m], grid.slice_bounds[m + 1]
    assert lo <= 0.2 < hi
    assert (r, c) == metric_to_pixel(0.0, 0.0, grid)
    assert index.candidates(r, c) == [(0, 0.2)]


def test_project_keeps_highest(grid):
    bev, _ = project(Scan(np.array([[1.01, 1.01, 0.1], [1.02, 1.03, 0.3]])), grid)
    assert bev.channels[bev.occupied].tolist() == [0.3]


def test_project_empty(grid):
    bev, index = project(Scan(np.zeros((0, 3))), grid)
    assert not bev.occupied.any()
    assert np.all(bev.channels == EMPTY)
    assert len(index) == 0


def test_index_covers_points_outside_slices(grid):
    pts = np.array([[0.0, 0.0, -3.0], [0.0, 0.0, 0.2], [0.0, 0.0, 5.0], [30.0, 0.0, 0.0]])
    bev, index = project(Scan(pts), grid)
    r, c = metric_to_pixel(0.0, 0.0, grid)
    assert index.candidates(r, c) == [(0, -3.0), (1, 0.2), (2, 5.0)]
    assert bev.occupied.sum() == 1
    s = bev.summary
    assert (s.n_points, s.n_in_extent, s.n_out_of_extent, s.n_out_of_slices) == (4, 3, 1, 2)


def test_project_invariants(grid, rng):
    pts = np.column_stack([rng.uniform(-30, 30, 20000), rng.uniform(-30, 30, 20000), rng.uniform(-3, 1, 20000)])
    scan = Scan(pts)
    bev, index = project(scan, grid)
    in_extent = sum(metric_to_pixel(x, y, grid) is not None for x, y in pts[:, :2])
    assert index.n_entries == in_extent
    for pix, cands in list(index.items())[:200]:
        for pid, z in cands:
            assert metric_to_pixel(pts[pid, 0], pts[pid, 1], grid) == pix
            assert pts[pid, 2] == z
    b = np.asarray(grid.slice_bounds)
    for m in range(grid.n_slices):
        vals = bev.channels[m][bev.occupied[m]]
        assert np.all((vals >= b[m]) & (vals < b[m + 1]))
    # brute-force max per cell/slice on a sample of cells
    for r, c in np.argwhere(bev.occupied.any(0))[:100]:
        ids = [pid for pid, _ in index.candidates(r, c)]
        for m in range(grid.n_slices):
            zs = [pts[i, 2] for i in ids if b[m] <= pts[i, 2] < b[m + 1]]
            expected = max(zs) if zs else EMPTY
            assert bev.channels[m, r, c] == expected


def test_project_order_independent(grid, rng):
    pts = rng.uniform(-10, 10, (3000, 3)) * [1, 1, 0.2]
    perm = rng.permutation(len(pts))
    a, ia = project(Scan(pts), grid)
    b, ib = project(Scan(pts[perm]), grid)
    np.testing.assert_array_equal(a.channels, b.channels)
    np.testing.assert_array_equal(ia.pixels, ib.pixels)
    np.testing.assert_array_equal(np.sort(ia.z), np.sort(ib.z))


def test_debug_images(tmp_path, small_grid):
    bev, _ = project(Scan(np.array([[0.0, 0.0, -1.0], [1.0, 1.0, -0.9], [2.0, 2.0, 0.4]])), small_grid)
    images = bev.to_images()
    assert len(images) == small_grid.n_slices
    assert images[3].max() == 255 and images[3].dtype == np.uint8
    paths = bev.save_images(tmp_path)
    assert len(paths) == 6 and all(p.exists() for p in paths)
