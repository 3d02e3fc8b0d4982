import numpy as np
from scipy.spatial import cKDTree

from .._validation import check_count, check_points, check_positive

NOISE = -1


def region_query(points, eps):
    """Neighbor lists (self included) using ``|p - q|^2 <= eps^2``."""
    if len(points) == 0:
        return []
    tree = cKDTree(points)
    candidates = tree.query_ball_point(points, r=eps * (1 + 1e-9))
    eps2 = eps * eps
    out = []
    for i, cand in enumerate(candidates):
        cand = np.sort(np.asarray(cand, dtype=np.int64))
        d2 = ((points[cand] - points[i]) ** 2).sum(axis=1)
        out.append(cand[d2 <= eps2])
    return out


def dbscan_labels(points, eps, min_pts):
    """Label array (``NOISE`` for noise) and core flags.

    Points are visited in input order, so cluster ids follow the lowest core
    index of each cluster and a border point reachable from several clusters
    joins the lowest id.
    """
    points = check_points(points)
    eps = check_positive(eps, "eps")
    min_pts = check_count(min_pts, "min_pts", minimum=2)
    neighbors = region_query(points, eps)
    core = np.array([len(nb) >= min_pts for nb in neighbors], dtype=bool)
    labels = np.full(len(points), NOISE, dtype=np.int64)
    cluster = 0
    for i in range(len(points)):
        if labels[i] != NOISE or not core[i]:
            continue
        labels[i] = cluster
        frontier = [i]
        while frontier:
            p = frontier.pop()
            for q in neighbors[p]:
                if labels[q] == NOISE:
                    labels[q] = cluster
                    if core[q]:
                        frontier.append(q)
        cluster += 1
    return labels, core


def dbscan(points, eps, min_pts):
    """Return ``(clusters, noise)`` as lists of point indices, each ascending."""
    labels, _ = dbscan_labels(points, eps, min_pts)
    n_clusters = int(labels.max()) + 1 if len(labels) else 0
    clusters = [np.flatnonzero(labels == k).tolist() for k in range(n_clusters)]
    return clusters, np.flatnonzero(labels == NOISE).tolist()
