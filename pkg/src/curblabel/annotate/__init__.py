"""World curb cloud -> simplified 3D polylines."""
from .dbscan import dbscan, dbscan_labels
from .pipeline import AnnotateSummary, CurbAnnotator, CurbDBSCAN, VoxelDownsampler, annotate_pipeline
from .rdp import point_segment_distance, simplify_rdp
from .skeleton import SkeletonGraph, graph_to_polylines, skeletonize
from .types import AnnotateParams, Curb, CurbSet, Polyline3D
from .voxel import voxel_centroids, voxel_downsample

__all__ = [
    "AnnotateParams", "AnnotateSummary", "Curb", "CurbAnnotator", "CurbDBSCAN", "CurbSet",
    "Polyline3D", "SkeletonGraph", "VoxelDownsampler", "annotate_pipeline", "dbscan",
    "dbscan_labels", "graph_to_polylines", "point_segment_distance", "simplify_rdp",
    "skeletonize", "voxel_centroids", "voxel_downsample",
]
