"""Per-scan binary curb masks in BEV space and the providers that make them.

A mask source is any callable ``source(scan_index, bev) -> CurbMask``.  Three
providers ship here: masks loaded from files (external model output, either
binary images or probability maps), ground-truth rasterization (the oracle),
and a classical height-step heuristic.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Protocol

import numpy as np

from .exceptions import ContractError, FormatError, ValidationError

MASK_THRESHOLD = 128


@dataclass(frozen=True, eq=False)
class CurbMask:
    grid: object
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits).astype(bool)
        if bits.shape != self.grid.shape:
            raise ContractError(f"mask shape {bits.shape} does not match grid {self.grid.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __eq__(self, other):
        if not isinstance(other, CurbMask):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.bits, other.bits)

    @property
    def count(self):
        return int(self.bits.sum())

    def pixels(self):
        """(row, col) pairs of curb cells in raster order."""
        return [tuple(rc) for rc in np.argwhere(self.bits).tolist()]


@dataclass(frozen=True, eq=False)
class ProbMask:
    grid: object
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ContractError(f"probability map shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all((values >= 0) & (values <= 1)):
            raise ValidationError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "values", values)


class MaskSource(Protocol):
    def __call__(self, scan_index: int, bev) -> CurbMask: ...


def _read_gray(path):
    from PIL import Image

    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "1", "P"):
                raise FormatError(f"{path}: expected an 8-bit grayscale image, got mode {img.mode}")
            return np.asarray(img.convert("L"))
    except OSError as exc:
        raise OSError(f"cannot read mask {path}: {exc}") from exc


def load_mask(path, grid):
    """Read an 8-bit grayscale image; pixels >= 128 are curb."""
    arr = _read_gray(path)
    if arr.shape != grid.shape:
        raise FormatError(f"{path}: expected {grid.height}x{grid.width} (rows x cols), "
                          f"found {arr.shape[0]}x{arr.shape[1]}")
    return CurbMask(grid, arr >= MASK_THRESHOLD)


def save_mask(mask, path):
    from PIL import Image

    Image.fromarray(np.where(mask.bits, 255, 0).astype(np.uint8), mode="L").save(path)


def load_prob(path, grid):
    """Probability map from ``.npy`` (floats) or an 8-bit image (value / 255)."""
    path = Path(path)
    if path.suffix == ".npy":
        values = np.load(path)
    else:
        values = _read_gray(path) / 255.0
    if values.shape != grid.shape:
        raise FormatError(f"{path}: expected {grid.height}x{grid.width}, found {'x'.join(map(str, values.shape))}")
    return ProbMask(grid, values)


def threshold(prob, t=0.5):
    if not 0 <= t <= 1:
        raise ValidationError(f"threshold must lie in [0, 1], got {t}")
    return CurbMask(prob.grid, prob.values >= t)


# -- rasterization ---------------------------------------------------------

def _t_interval(a0, d, lo, hi):
    """Parameter set {t : lo <= a0 + t*d < hi} as (t_lo, lo_open, t_hi, hi_open).

    Returns None for the whole line (d == 0 and a0 inside) and False when empty.
    """
    if d == 0:
        return None if lo <= a0 < hi else False
    if d > 0:
        return (lo - a0) / d, False, (hi - a0) / d, True
    return (hi - a0) / d, True, (lo - a0) / d, False


def _clip01(iv):
    t_lo, lo_open, t_hi, hi_open = iv
    if t_lo < 0:
        t_lo, lo_open = Fraction(0), False
    if t_hi > 1:
        t_hi, hi_open = Fraction(1), False
    if t_lo > t_hi or (t_lo == t_hi and (lo_open or hi_open)):
        return None
    return t_lo, lo_open, t_hi, hi_open


def _strip_cells(u0, v0, u1, v1, n_rows, n_cols):
    """Cells [c, c+1) x [r, r+1) met by the closed segment, one row strip at a time."""
    du, dv = u1 - u0, v1 - v0
    r_first = max(math.floor(min(v0, v1)), 0)
    r_last = min(math.floor(max(v0, v1)), n_rows - 1)
    for r in range(r_first, r_last + 1):
        iv = _t_interval(v0, dv, r, r + 1)
        if iv is False:
            continue
        iv = _clip01((Fraction(0), False, Fraction(1), False) if iv is None else iv)
        if iv is None:
            continue
        t_lo, lo_open, t_hi, hi_open = iv
        if du == 0:
            c_lo = c_hi = math.floor(u0)
        else:
            a, b = u0 + t_lo * du, u0 + t_hi * du
            b_open = hi_open
            if du < 0:
                a, b, b_open = b, a, lo_open
            c_lo = math.floor(a)
            c_hi = math.ceil(b) - 1 if b_open else math.floor(b)
        for c in range(max(c_lo, 0), min(c_hi, n_cols - 1) + 1):
            yield r, c


def segment_cells(u0, v0, u1, v1, n_rows, n_cols):
    """All in-grid cells whose half-open square meets the segment (grid units).

    Exact rational arithmetic on the given float coordinates; strips run along
    the shorter axis.
    """
    u0, v0, u1, v1 = (Fraction(float(c)) for c in (u0, v0, u1, v1))
    if abs(u1 - u0) < abs(v1 - v0):
        return [(r, c) for c, r in _strip_cells(v0, u0, v1, u1, n_cols, n_rows)]
    return list(_strip_cells(u0, v0, u1, v1, n_rows, n_cols))


def rasterize_polylines(curbs, grid):
    """Mark every cell crossed by a polyline segment's xy projection."""
    bits = np.zeros(grid.shape, dtype=bool)
    x0, y0, res = grid.x_range[0], grid.y_range[0], grid.resolution
    for polyline in (c.polyline if hasattr(c, "polyline") else c for c in curbs):
        uv = np.column_stack([(polyline.vertices[:, 0] - x0) / res, (polyline.vertices[:, 1] - y0) / res])
        for (u0, v0), (u1, v1) in zip(uv[:-1], uv[1:]):
            if (max(u0, u1) < 0 or min(u0, u1) >= grid.width
                    or max(v0, v1) < 0 or min(v0, v1) >= grid.height):
                continue
            for r, c in segment_cells(u0, v0, u1, v1, grid.height, grid.width):
                bits[r, c] = True
    return CurbMask(grid, bits)


# -- heuristic -------------------------------------------------------------

def max_neighbor_step(surface):
    """Largest |height difference| to any occupied 8-neighbor; NaN if none."""
    H, W = surface.shape
    pad = np.full((H + 2, W + 2), np.nan)
    pad[1:-1, 1:-1] = np.where(np.isfinite(surface), surface, np.nan)
    centre = pad[1:-1, 1:-1]
    best = np.full((H, W), np.nan)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == dc == 0:
                continue
            nb = pad[1 + dr:H + 1 + dr, 1 + dc:W + 1 + dc]
            diff = np.abs(centre - nb)
            best = np.fmax(best, diff)
    return best


def heuristic_detect(bev, grad_min=0.03, grad_max=0.14):
    """Curb where the lowest-surface step to some 8-neighbor lies in [grad_min, grad_max]."""
    if not grad_min < grad_max:
        raise ValidationError(f"grad_min must be < grad_max, got {grad_min}, {grad_max}")
    step = max_neighbor_step(bev.lowest_surface())
    with np.errstate(invalid="ignore"):
        bits = (step >= grad_min) & (step <= grad_max)
    return CurbMask(bev.grid, bits)


# -- providers -------------------------------------------------------------

def _format_path(pattern, scan_index):
    return Path(str(pattern).format(scan_index, scan_index=scan_index))


@dataclass(frozen=True)
class FileMaskSource:
    """Binary mask images; ``pattern`` is formatted with the scan index."""

    pattern: str

    def __call__(self, scan_index, bev):
        return load_mask(_format_path(self.pattern, scan_index), bev.grid)


@dataclass(frozen=True)
class ProbMaskSource:
    pattern: str
    threshold: float = 0.5

    def __call__(self, scan_index, bev):
        return threshold(load_prob(_format_path(self.pattern, scan_index), bev.grid), self.threshold)


@dataclass(frozen=True)
class OracleMaskSource:
    """Rasterizes world-frame ground truth into each scan's ego frame."""

    curbs: object
    poses: tuple

    def __call__(self, scan_index, bev):
        if not 0 <= scan_index < len(self.poses):
            raise ContractError(f"no pose for scan {scan_index}")
        ego = self.curbs.transformed(self.poses[scan_index].inverse())
        return rasterize_polylines(ego, bev.grid)


@dataclass(frozen=True)
class HeuristicMaskSource:
    grad_min: float = 0.03
    grad_max: float = 0.14

    def __call__(self, scan_index, bev):
        return heuristic_detect(bev, self.grad_min, self.grad_max)
