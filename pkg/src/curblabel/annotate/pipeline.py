"""Cloud-to-polylines annotation, exposed as scikit-learn style estimators."""
import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin

from .._validation import check_points
from ..sequence import WorldCurbCloud
from .dbscan import NOISE, dbscan_labels
from .rdp import simplify_rdp
from .skeleton import graph_to_polylines, skeletonize
from .types import AnnotateParams, Curb, CurbSet
from .voxel import voxel_centroids, voxel_downsample

log = logging.getLogger(__name__)


def _as_cloud(X):
    if isinstance(X, WorldCurbCloud):
        return X
    X = check_points(X)
    return WorldCurbCloud(X, np.zeros(len(X), np.int64), np.arange(len(X)))


class VoxelDownsampler(TransformerMixin, BaseEstimator):
    """Replace the points of each occupied voxel by their centroid."""

    def __init__(self, voxel_size=0.15):
        self.voxel_size = voxel_size

    def fit(self, X, y=None):
        check_points(X)
        return self

    def transform(self, X):
        centroids, _, _ = voxel_centroids(check_points(X), self.voxel_size)
        return centroids


class CurbDBSCAN(ClusterMixin, BaseEstimator):
    """Deterministic DBSCAN; ``labels_`` uses -1 for noise."""

    def __init__(self, eps=0.5, min_pts=5):
        self.eps = eps
        self.min_pts = min_pts

    def fit(self, X, y=None):
        labels, core = dbscan_labels(check_points(X), self.eps, self.min_pts)
        self.labels_ = labels
        self.core_sample_indices_ = np.flatnonzero(core)
        self.n_clusters_ = int(labels.max()) + 1 if len(labels) else 0
        return self


@dataclass
class AnnotateSummary:
    n_input: int = 0
    n_downsampled: int = 0
    n_clusters: int = 0
    n_noise: int = 0
    n_small_clusters: int = 0
    n_collapsed: int = 0
    n_polylines: int = 0


class CurbAnnotator(BaseEstimator):
    """Voxel subsampling, DBSCAN, skeletonization and RDP in one estimator.

    After ``fit``: ``curbs_`` (CurbSet), ``downsampled_`` (WorldCurbCloud),
    ``labels_`` (cluster per downsampled point), ``skeletons_`` (one per kept
    cluster) and ``summary_``.
    """

    def __init__(self, voxel_size=0.15, dbscan_eps=0.5, dbscan_min_pts=5, min_cluster_points=10,
                 skeleton_voxel=0.2, prune_len=1.0, rdp_epsilon=0.05):
        self.voxel_size = voxel_size
        self.dbscan_eps = dbscan_eps
        self.dbscan_min_pts = dbscan_min_pts
        self.min_cluster_points = min_cluster_points
        self.skeleton_voxel = skeleton_voxel
        self.prune_len = prune_len
        self.rdp_epsilon = rdp_epsilon

    @classmethod
    def from_params(cls, params):
        return cls(**params.to_dict())

    def fit(self, X, y=None):
        p = AnnotateParams(**self.get_params())
        cloud = _as_cloud(X)
        summary = AnnotateSummary(n_input=len(cloud))
        down = voxel_downsample(cloud, p.voxel_size)
        summary.n_downsampled = len(down)
        labels, _ = dbscan_labels(down.xyz, p.dbscan_eps, p.dbscan_min_pts)
        summary.n_noise = int((labels == NOISE).sum())
        summary.n_clusters = int(labels.max()) + 1 if len(labels) else 0

        curbs, skeletons = [], []
        for k in range(summary.n_clusters):
            members = down.xyz[labels == k]
            graph = skeletonize(members, p.skeleton_voxel, p.prune_len, p.min_cluster_points)
            if graph is None:
                summary.n_small_clusters += 1
                continue
            skeletons.append(graph)
            polylines = graph_to_polylines(graph)
            if not polylines:
                summary.n_collapsed += 1
                continue
            for polyline in polylines:
                curbs.append(Curb(len(curbs), simplify_rdp(polyline, p.rdp_epsilon)))
        summary.n_polylines = len(curbs)
        log.debug("annotate summary: %s", summary)

        self.downsampled_ = down
        self.labels_ = labels
        self.skeletons_ = skeletons
        self.curbs_ = CurbSet(tuple(curbs))
        self.summary_ = summary
        return self


def annotate_pipeline(cloud, params=None):
    """Return the CurbSet for ``cloud`` (see :class:`CurbAnnotator`)."""
    params = params or AnnotateParams()
    return CurbAnnotator.from_params(params).fit(cloud).curbs_
