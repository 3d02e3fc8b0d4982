"""Bird's-eye-view projection into per-slice max-height maps.

Rows index y and columns index x, both counted from the grid minimum.  Every
axis interval is half-open, so each point lands in exactly one cell and one
slice.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ContractError, ValidationError

EMPTY = -np.inf


def _default_slices():
    return tuple(np.linspace(-2.5, 0.5, 7).round(12).tolist())


@dataclass(frozen=True)
class GridConfig:
    resolution: float = 0.1
    x_range: tuple = (-25.6, 25.6)
    y_range: tuple = (-25.6, 25.6)
    slice_bounds: tuple = field(default_factory=_default_slices)

    def __post_init__(self):
        object.__setattr__(self, "x_range", tuple(float(v) for v in self.x_range))
        object.__setattr__(self, "y_range", tuple(float(v) for v in self.y_range))
        object.__setattr__(self, "slice_bounds", tuple(float(v) for v in self.slice_bounds))
        if not self.resolution > 0:
            raise ValidationError(f"resolution must be > 0, got {self.resolution}")
        for name, (lo, hi) in (("x_range", self.x_range), ("y_range", self.y_range)):
            if not hi > lo:
                raise ValidationError(f"{name} must satisfy min < max, got {(lo, hi)}")
        b = self.slice_bounds
        if len(b) < 2 or any(hi <= lo for lo, hi in zip(b, b[1:])):
            raise ValidationError(f"slice_bounds must hold >= 2 strictly ascending values, got {b}")

    @property
    def width(self):
        return round((self.x_range[1] - self.x_range[0]) / self.resolution)

    @property
    def height(self):
        return round((self.y_range[1] - self.y_range[0]) / self.resolution)

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def n_slices(self):
        return len(self.slice_bounds) - 1

    def to_dict(self):
        return {"resolution": self.resolution, "x_range": list(self.x_range),
                "y_range": list(self.y_range), "slice_bounds": list(self.slice_bounds)}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ("resolution", "x_range", "y_range", "slice_bounds") if k in d})


def metric_to_pixel(x, y, grid):
    """Return ``(row, col)`` of the cell holding (x, y), or None when outside."""
    col = math.floor((x - grid.x_range[0]) / grid.resolution)
    row = math.floor((y - grid.y_range[0]) / grid.resolution)
    if 0 <= row < grid.height and 0 <= col < grid.width:
        return row, col
    return None


def pixel_to_metric(row, col, grid):
    """Cell-center coordinates of ``(row, col)``."""
    if not (0 <= row < grid.height and 0 <= col < grid.width):
        raise IndexError(f"pixel {(row, col)} outside {grid.height}x{grid.width} grid")
    return (grid.x_range[0] + (col + 0.5) * grid.resolution,
            grid.y_range[0] + (row + 0.5) * grid.resolution)


def points_to_pixels(xy, grid):
    """Vectorized :func:`metric_to_pixel`; returns rows, cols and an in-grid mask."""
    xy = np.asarray(xy, dtype=np.float64).reshape(-1, 2)
    col = np.floor((xy[:, 0] - grid.x_range[0]) / grid.resolution)
    row = np.floor((xy[:, 1] - grid.y_range[0]) / grid.resolution)
    inside = (row >= 0) & (row < grid.height) & (col >= 0) & (col < grid.width)
    return row.astype(np.int64), col.astype(np.int64), inside


@dataclass(frozen=True)
class ProjectionSummary:
    n_points: int
    n_in_extent: int
    n_out_of_extent: int
    n_out_of_slices: int


@dataclass(frozen=True, eq=False)
class BevStack:
    """M height maps of shape (height, width); :data:`EMPTY` marks no return."""

    grid: GridConfig
    channels: np.ndarray
    summary: ProjectionSummary = None

    @property
    def occupied(self):
        return np.isfinite(self.channels)

    def lowest_surface(self):
        """Per-cell minimum over non-empty channels (EMPTY where all are empty)."""
        filled = np.where(self.occupied, self.channels, np.inf)
        low = filled.min(axis=0)
        low[np.isinf(low)] = EMPTY
        return low

    def to_images(self):
        """8-bit images, one per channel, min-max normalized over occupied cells."""
        images = []
        for ch in self.channels:
            occ = np.isfinite(ch)
            img = np.zeros(ch.shape, dtype=np.uint8)
            if occ.any():
                lo, hi = ch[occ].min(), ch[occ].max()
                scale = 255.0 / (hi - lo) if hi > lo else 0.0
                img[occ] = np.round((ch[occ] - lo) * scale).astype(np.uint8)
            images.append(img)
        return images

    def save_images(self, directory, stem="bev"):
        from PIL import Image

        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for m, img in enumerate(self.to_images()):
            path = directory / f"{stem}_ch{m}.png"
            Image.fromarray(img, mode="L").save(path)
            paths.append(path)
        return paths

    def save(self, path):
        channels = np.where(self.occupied, self.channels, np.finfo(np.float64).min)
        np.savez_compressed(path, channels=channels, grid=np.array(repr(self.grid.to_dict())))


@dataclass(frozen=True, eq=False)
class PixelPointIndex:
    """Pixel -> [(point id, z)] for every in-extent point of one scan.

    Stored CSR-style: ``point_ids`` grouped by ascending linear pixel
    (``row * width + col``), ascending id within a pixel.
    """

    grid: GridConfig
    pixels: np.ndarray
    offsets: np.ndarray
    point_ids: np.ndarray
    z: np.ndarray

    def __len__(self):
        return len(self.pixels)

    @property
    def n_entries(self):
        return len(self.point_ids)

    def candidates(self, row, col):
        key = row * self.grid.width + col
        k = np.searchsorted(self.pixels, key)
        if k == len(self.pixels) or self.pixels[k] != key:
            return []
        sl = slice(self.offsets[k], self.offsets[k + 1])
        return list(zip(self.point_ids[sl].tolist(), self.z[sl].tolist()))

    def items(self):
        w = self.grid.width
        for k, key in enumerate(self.pixels.tolist()):
            sl = slice(self.offsets[k], self.offsets[k + 1])
            yield (key // w, key % w), list(zip(self.point_ids[sl].tolist(), self.z[sl].tolist()))

    def entry_pixels(self):
        """Linear pixel of every entry, aligned with ``point_ids``."""
        return np.repeat(self.pixels, np.diff(self.offsets))


def project(scan, grid):
    """Project ``scan`` into a :class:`BevStack` and its :class:`PixelPointIndex`."""
    xyz = scan.xyz
    n = len(xyz)
    H, W, M = grid.height, grid.width, grid.n_slices
    rows, cols, inside = points_to_pixels(xyz[:, :2], grid)

    ids = np.flatnonzero(inside)
    lin = rows[ids] * W + cols[ids]
    order = np.lexsort((ids, lin))
    lin_sorted = lin[order]
    ids_sorted = ids[order]
    pixels, starts = np.unique(lin_sorted, return_index=True)
    offsets = np.append(starts, len(lin_sorted)).astype(np.int64)
    index = PixelPointIndex(grid, pixels.astype(np.int64), offsets, ids_sorted.astype(np.int64),
                            xyz[ids_sorted, 2].copy())

    bounds = np.asarray(grid.slice_bounds)
    z = xyz[ids, 2]
    in_slices = (z >= bounds[0]) & (z < bounds[-1])
    sl = np.searchsorted(bounds, z[in_slices], side="right") - 1
    flat = np.full(M * H * W, EMPTY)
    np.maximum.at(flat, sl * (H * W) + lin[in_slices], z[in_slices])
    summary = ProjectionSummary(n, len(ids), n - len(ids), int((~in_slices).sum()))
    return BevStack(grid, flat.reshape(M, H, W), summary), index


def check_same_grid(a, b, what="grid"):
    if a != b:
        raise ContractError(f"{what} mismatch: {a} vs {b}")
