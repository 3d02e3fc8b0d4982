import numpy as np

from .._validation import check_points, check_positive
from ..sequence import WorldCurbCloud


def voxel_keys(points, voxel_size):
    return np.floor(points / voxel_size).astype(np.int64)


def voxel_centroids(points, voxel_size):
    """Centroid of each occupied voxel, voxels in lexicographic key order.

    Returns ``(centroids, keys, representative)`` where ``representative[k]``
    is the index of the input point nearest to centroid ``k`` (lowest index on
    ties).
    """
    points = check_points(points)
    voxel_size = check_positive(voxel_size, "voxel_size")
    if len(points) == 0:
        return np.zeros((0, 3)), np.zeros((0, 3), np.int64), np.zeros(0, np.int64)
    keys, inverse, counts = np.unique(voxel_keys(points, voxel_size), axis=0,
                                      return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    centroids = np.column_stack([np.bincount(inverse, weights=points[:, d], minlength=len(keys))
                                 for d in range(3)]) / counts[:, None]
    dist = np.linalg.norm(points - centroids[inverse], axis=1)
    order = np.lexsort((np.arange(len(points)), dist, inverse))
    first = np.r_[True, inverse[order][1:] != inverse[order][:-1]]
    return centroids, keys, order[first]


def voxel_downsample(cloud, voxel_size):
    """One centroid per occupied voxel; provenance from the point nearest it."""
    centroids, _, rep = voxel_centroids(cloud.xyz, voxel_size)
    return WorldCurbCloud(centroids, cloud.scan_index[rep], cloud.point_id[rep])
