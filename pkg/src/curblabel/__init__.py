"""Sequence-level 3D curb pre-annotation from LiDAR scans and odometry."""
from .annotate import AnnotateParams, CurbAnnotator, CurbSet, Polyline3D, annotate_pipeline
from .bev import GridConfig, metric_to_pixel, pixel_to_metric, project
from .core import Pose, Scan, Sequence, compose, read_poses, read_scan_bin, transform_points
from .detect import CurbMask, ProbMask, heuristic_detect, load_mask, rasterize_polylines, threshold
from .lift import CurbPoints, lift_mask
from .metrics import cross_entropy, pixel_metrics, polyline_metrics, sample_polylines
from .sequence import WorldCurbCloud, reconstruct
from .synth import SceneSpec, generate_scene

__version__ = "0.1.0"

__all__ = [
    "AnnotateParams", "CurbAnnotator", "CurbMask", "CurbPoints", "CurbSet", "GridConfig", "Polyline3D",
    "Pose", "ProbMask", "Scan", "SceneSpec", "Sequence", "WorldCurbCloud", "annotate_pipeline",
    "compose", "cross_entropy", "generate_scene", "heuristic_detect", "lift_mask", "load_mask",
    "metric_to_pixel", "pixel_metrics", "pixel_to_metric", "polyline_metrics", "project",
    "rasterize_polylines", "read_poses", "read_scan_bin", "reconstruct", "sample_polylines",
    "threshold", "transform_points",
]
