import numpy as np

from .types import Polyline3D


def point_segment_distance(points, a, b):
    """Euclidean distance from each row of ``points`` to segment ``ab``."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip((points - a) @ ab / denom, 0.0, 1.0)
    return np.linalg.norm(points - (a + t[:, None] * ab), axis=1)


def rdp_keep(vertices, epsilon):
    """Boolean mask of retained vertices (Ramer-Douglas-Peucker, 3D)."""
    v = np.asarray(vertices, dtype=np.float64)
    n = len(v)
    keep = np.zeros(n, dtype=bool)
    if n == 0:
        return keep
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        d = point_segment_distance(v[i + 1:j], v[i], v[j])
        k = int(np.argmax(d))
        if d[k] > epsilon:
            k += i + 1
            keep[k] = True
            stack.append((k, j))
            stack.append((i, k))
    return keep


def simplify_rdp(polyline, epsilon):
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    v = polyline.vertices
    return Polyline3D(v[rdp_keep(v, epsilon)])
