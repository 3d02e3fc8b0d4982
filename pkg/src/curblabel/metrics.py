"""Precision / recall / F-score for BEV masks and 3D polylines, plus the
pixel-wise binary cross-entropy used to score probability maps.

Matching is by distance threshold, not one-to-one assignment: a prediction is
correct when any ground-truth element lies within the tolerance, and vice
versa for recall.  With no predictions precision is 1; with no ground truth
recall is 1.
"""
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .bev import check_same_grid
from .exceptions import ValidationError

CLAMP = 1e-7


def _ratio(num, den):
    return 1.0 if den == 0 else num / den


def f_score(precision, recall):
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PixelEvalReport:
    tolerance_px: float
    precision: float
    recall: float
    f_score: float
    tp: int
    fp: int
    fn: int
    n_pred: int
    n_gt: int

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        return _table([("tolerance_px", self.tolerance_px), ("precision", self.precision),
                       ("recall", self.recall), ("f_score", self.f_score),
                       ("tp", self.tp), ("fp", self.fp), ("fn", self.fn)])


@dataclass(frozen=True)
class PolylineEvalReport:
    step: float
    tolerance: float
    precision: float
    recall: float
    f_score: float
    matched_pred: int
    total_pred: int
    matched_gt: int
    total_gt: int

    def to_dict(self):
        return {"precision": self.precision, "recall": self.recall, "f_score": self.f_score,
                "tolerance": self.tolerance, "step": self.step,
                "counts": {"matched_pred": self.matched_pred, "total_pred": self.total_pred,
                           "matched_gt": self.matched_gt, "total_gt": self.total_gt}}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        return _table([("step", self.step), ("tolerance", self.tolerance),
                       ("precision", self.precision), ("recall", self.recall),
                       ("f_score", self.f_score),
                       ("pred samples", f"{self.matched_pred}/{self.total_pred}"),
                       ("gt samples", f"{self.matched_gt}/{self.total_gt}")])


def _table(rows):
    width = max(len(k) for k, _ in rows)
    lines = []
    for k, v in rows:
        v = f"{v:.4f}" if isinstance(v, float) else str(v)
        lines.append(f"{k:<{width}}  {v}")
    return "\n".join(lines)


def _within(src, dst, tol):
    """For each True cell of ``src``: is a True cell of ``dst`` within ``tol`` px?"""
    if not dst.any():
        return np.zeros(int(src.sum()), dtype=bool)
    dist = ndimage.distance_transform_edt(~dst)
    return dist[src] <= tol


def pixel_metrics(pred, gt, tol_px):
    check_same_grid(pred.grid, gt.grid, "pred/gt grid")
    if tol_px < 0:
        raise ValidationError(f"tolerance must be >= 0, got {tol_px}")
    p, g = pred.bits, gt.bits
    tp = int(_within(p, g, tol_px).sum())
    matched_gt = int(_within(g, p, tol_px).sum())
    n_pred, n_gt = int(p.sum()), int(g.sum())
    precision, recall = _ratio(tp, n_pred), _ratio(matched_gt, n_gt)
    return PixelEvalReport(tol_px, precision, recall, f_score(precision, recall),
                           tp, n_pred - tp, n_gt - matched_gt, n_pred, n_gt)


def _polyline_samples(vertices, step):
    seg = np.diff(vertices, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.r_[0.0, np.cumsum(seg_len)]
    total = cum[-1]
    n = int(np.floor(total / step + 1e-9))
    s = np.arange(n + 1) * step
    if n > 0 and s[-1] >= total - 1e-9 * max(1.0, total):
        s[-1] = total
    else:
        s = np.r_[s, total]
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(seg_len[k] > 0, (s - cum[k]) / seg_len[k], 0.0)
    return vertices[k] + np.clip(t, 0.0, 1.0)[:, None] * seg[k]


def sample_polylines(curbs, step):
    """Points at arc lengths 0, step, 2*step, ... and the end of every polyline."""
    if not step > 0:
        raise ValidationError(f"step must be > 0, got {step}")
    chunks = [_polyline_samples(c.polyline.vertices, step) for c in curbs]
    return np.vstack(chunks) if chunks else np.zeros((0, 3))


def _matched(src, dst, tol):
    if len(src) == 0 or len(dst) == 0:
        return 0
    dist, _ = cKDTree(dst).query(src, k=1, distance_upper_bound=tol * (1 + 1e-9) + 1e-12)
    return int((dist <= tol).sum())


def polyline_metrics(pred, gt, step=0.1, tolerance=0.1):
    if not tolerance > 0:
        raise ValidationError(f"tolerance must be > 0, got {tolerance}")
    ps, gs = sample_polylines(pred, step), sample_polylines(gt, step)
    mp, mg = _matched(ps, gs, tolerance), _matched(gs, ps, tolerance)
    precision, recall = _ratio(mp, len(ps)), _ratio(mg, len(gs))
    return PolylineEvalReport(step, tolerance, precision, recall, f_score(precision, recall),
                              mp, len(ps), mg, len(gs))


def cross_entropy(prob, gt):
    """Mean binary cross-entropy (natural log) over all pixels."""
    check_same_grid(prob.grid, gt.grid, "prob/gt grid")
    p = np.clip(prob.values, CLAMP, 1 - CLAMP)
    y = gt.bits.astype(np.float64)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))
