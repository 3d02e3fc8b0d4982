"""Tree skeletons of elongated point clusters.

Nodes are voxel centroids; edges join 26-adjacent voxels.  Disconnected parts
are bridged by their shortest links, the minimum spanning tree is taken, and
short side branches are pruned away one at a time.
"""
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .._validation import check_points, check_positive
from .types import Polyline3D
from .voxel import voxel_centroids

_OFFSETS = [d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]


@dataclass(frozen=True, eq=False)
class SkeletonGraph:
    nodes: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))

    @property
    def n_nodes(self):
        return len(self.nodes)

    def degree(self):
        return np.bincount(self.edges.reshape(-1), minlength=self.n_nodes)

    def adjacency(self):
        adj = [[] for _ in range(self.n_nodes)]
        for i, j in self.edges.tolist():
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def edge_lengths(self):
        if len(self.edges) == 0:
            return np.zeros(0)
        return np.linalg.norm(self.nodes[self.edges[:, 0]] - self.nodes[self.edges[:, 1]], axis=1)

    def is_tree(self):
        if self.n_nodes == 0:
            return True
        if len(self.edges) != self.n_nodes - 1:
            return False
        uf = _UnionFind(self.n_nodes)
        return all(uf.union(i, j) for i, j in self.edges.tolist())


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[max(ri, rj)] = min(ri, rj)
        return True


def _adjacency_edges(nodes, keys):
    lookup = {k: i for i, k in enumerate(map(tuple, keys.tolist()))}
    edges = []
    for i, k in enumerate(map(tuple, keys.tolist())):
        for d in _OFFSETS:
            j = lookup.get((k[0] + d[0], k[1] + d[1], k[2] + d[2]))
            if j is not None and j > i:
                edges.append((float(np.linalg.norm(nodes[i] - nodes[j])), i, j))
    return edges


def _bridge_components(nodes, edges):
    """Shortest links joining the connected components into one."""
    uf = _UnionFind(len(nodes))
    for _, i, j in edges:
        uf.union(i, j)
    roots = sorted({uf.find(i) for i in range(len(nodes))})
    if len(roots) < 2:
        return []
    members = {r: [] for r in roots}
    for i in range(len(nodes)):
        members[uf.find(i)].append(i)
    comps = [np.array(members[r]) for r in roots]
    trees = [cKDTree(nodes[c]) for c in comps]
    links = []
    for a, b in itertools.combinations(range(len(comps)), 2):
        dist, idx = trees[b].query(nodes[comps[a]])
        k = int(np.argmin(dist))
        i, j = int(comps[a][k]), int(comps[b][idx[k]])
        links.append((float(dist[k]), min(i, j), max(i, j), a, b))
    links.sort()
    comp_uf = _UnionFind(len(comps))
    return [(d, i, j) for d, i, j, a, b in links if comp_uf.union(a, b)]


def _minimum_spanning_tree(n, edges):
    uf = _UnionFind(n)
    return [(i, j) for _, i, j in sorted(edges) if uf.union(i, j)]


def _prune(nodes, edges, prune_len):
    """Drop the shortest leaf branch (< prune_len) ending at a junction, repeatedly."""
    n = len(nodes)
    adj = [set() for _ in range(n)]
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    alive = np.ones(n, dtype=bool)

    def dist(i, j):
        return float(np.linalg.norm(nodes[i] - nodes[j]))

    while True:
        best = None
        for leaf in range(n):
            if not alive[leaf] or len(adj[leaf]) != 1:
                continue
            branch, length, prev, cur = [leaf], 0.0, None, leaf
            while True:
                nxt = min(k for k in adj[cur] if k != prev)
                length += dist(cur, nxt)
                prev, cur = cur, nxt
                if len(adj[cur]) != 2:
                    break
                branch.append(cur)
            if len(adj[cur]) < 3 or length >= prune_len:
                continue
            if best is None or (length, leaf) < best[0]:
                best = ((length, leaf), branch, cur)
        if best is None:
            break
        _, branch, junction = best
        adj[junction].discard(branch[-1])
        for k in branch:
            for m in adj[k]:
                if m not in branch:
                    adj[m].discard(k)
            adj[k] = set()
            alive[k] = False

    remap = np.cumsum(alive) - 1
    kept_edges = sorted({(int(remap[min(i, j)]), int(remap[max(i, j)]))
                         for i in range(n) if alive[i] for j in adj[i]})
    return nodes[alive], kept_edges


def skeletonize(cluster, skeleton_voxel, prune_len, min_cluster_points=1):
    """Pruned spanning-tree skeleton of ``cluster``, or None if it is too small."""
    points = check_points(cluster)
    skeleton_voxel = check_positive(skeleton_voxel, "skeleton_voxel")
    prune_len = check_positive(prune_len, "prune_len")
    if len(points) < max(min_cluster_points, 1):
        return None
    nodes, keys, _ = voxel_centroids(points, skeleton_voxel)
    edges = _adjacency_edges(nodes, keys)
    edges += _bridge_components(nodes, edges)
    tree = _minimum_spanning_tree(len(nodes), edges)
    nodes, tree = _prune(nodes, tree, prune_len)
    return SkeletonGraph(nodes, np.array(tree, dtype=np.int64).reshape(-1, 2))


def graph_to_polylines(graph):
    """Split a tree into maximal chains whose interior nodes have degree 2."""
    adj = graph.adjacency()
    deg = [len(a) for a in adj]
    used = set()
    chains = []
    for start in range(graph.n_nodes):
        if deg[start] == 2 or deg[start] == 0:
            continue
        for nb in adj[start]:
            if (min(start, nb), max(start, nb)) in used:
                continue
            chain, prev, cur = [start], start, nb
            used.add((min(prev, cur), max(prev, cur)))
            chain.append(cur)
            while deg[cur] == 2:
                nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
                used.add((min(cur, nxt), max(cur, nxt)))
                prev, cur = cur, nxt
                chain.append(cur)
            chains.append(chain)
    return [Polyline3D(graph.nodes[c]) for c in chains if len(c) >= 2]
