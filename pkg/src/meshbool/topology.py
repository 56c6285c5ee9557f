"""Mesh validation and topology fingerprinting.

``check_topology`` computes the (connected components, Euler characteristic,
manifold) triple used to compare results against reference pipelines — two
meshes with equal fingerprints have the same coarse topology even when their
triangulations differ.

``validate_input`` reports the solid-input preconditions: closed
(watertight), consistently oriented, edge-manifold, vertex links connected,
and optionally free of self-intersections (an exact scan over non-adjacent
triangle pairs; it costs an intersection-detection pass).
"""

from __future__ import annotations

from collections import Counter, defaultdict

import numpy as np

from .arrangement import detect_intersections, prefilter_pairs
from .octree import Octree
from .soup import TriangleSoup


def _mesh_arrays(mesh):
    vertices = np.asarray(
        mesh.vertices if hasattr(mesh, "vertices") else mesh[0], np.float64
    ).reshape(-1, 3)
    triangles = np.asarray(
        mesh.triangles if hasattr(mesh, "triangles") else mesh[1], np.int64
    ).reshape(-1, 3)
    return vertices, triangles


def _weld(vertices, triangles):
    """Remap triangles onto bitwise-unique vertex coordinates (−0.0 and
    +0.0 identified).  File formats that repeat vertices per face (STL in
    particular) are topologically closed only after this identification."""
    if len(vertices) == 0:
        return triangles
    v = vertices.copy()
    v[v == 0.0] = 0.0
    view = np.ascontiguousarray(v).view(
        np.dtype((np.void, v.dtype.itemsize * 3))
    ).ravel()
    _, first, inverse = np.unique(view, return_index=True, return_inverse=True)
    return first[inverse][triangles] if len(triangles) else triangles


def _edge_tables(triangles):
    directed = Counter()
    undirected = Counter()
    for t in np.asarray(triangles, np.int64):
        for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            directed[(int(u), int(v))] += 1
            undirected[(int(min(u, v)), int(max(u, v)))] += 1
    return directed, undirected


def _components_by_edges(triangles, undirected):
    """Connected components of the triangle adjacency graph (triangles are
    adjacent when they share an undirected edge)."""
    n = len(triangles)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = {}
    for k, t in enumerate(np.asarray(triangles, np.int64)):
        for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            e = (int(min(u, v)), int(max(u, v)))
            if e in owner:
                a, b = find(owner[e]), find(k)
                if a != b:
                    parent[a] = b
            else:
                owner[e] = k
    return len({find(k) for k in range(n)})


def _links_connected(triangles):
    """True when every vertex's incident triangles form one edge-connected
    fan, i.e. no two surface sheets are pinched together at a vertex."""
    incident = defaultdict(list)
    tris = np.asarray(triangles, np.int64)
    for k, t in enumerate(tris):
        for v in t:
            incident[int(v)].append(k)
    for v, ks in incident.items():
        if len(ks) <= 1:
            continue
        local = {k: i for i, k in enumerate(ks)}
        parent = list(range(len(ks)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        owner = {}
        for k in ks:
            t = tris[k]
            others = [int(u) for u in t if u != v]
            for u in others:
                e = (min(v, u), max(v, u))
                if e in owner:
                    a, b = find(owner[e]), find(local[k])
                    if a != b:
                        parent[a] = b
                else:
                    owner[e] = local[k]
        if len({find(i) for i in range(len(ks))}) > 1:
            return False
    return True


def check_topology(mesh):
    """(components, Euler characteristic, manifold) of a triangle mesh.

    Accepts a BooleanResult, MeshFile, or (vertices, triangles) pair.
    Bitwise-equal vertices are identified first, so formats that repeat
    vertices per face (STL) fingerprint the surface they describe.
    χ = V − E + F over referenced vertices; components by shared-edge
    connectivity; the manifold flag requires every edge to bound exactly two
    opposedly-oriented triangles and every vertex link to be connected.
    """
    vertices, triangles = _mesh_arrays(mesh)
    if len(triangles) == 0:
        return 0, 0, True
    triangles = _weld(vertices, triangles)
    directed, undirected = _edge_tables(triangles)
    V = len(np.unique(triangles))
    E = len(undirected)
    F = len(triangles)
    components = _components_by_edges(triangles, undirected)
    manifold = (
        all(n == 2 for n in undirected.values())
        and all(n <= 1 for n in directed.values())
        and all(
            directed.get((v, u), 0) == directed.get((u, v), 0)
            for (u, v) in undirected
        )
        and _links_connected(triangles)
    )
    return components, V - E + F, manifold


def validate_input(mesh, scan_self_intersections=False):
    """Report precondition violations of one input mesh.

    Returns a dict with a ``violations`` list (empty = clean).  The
    self-intersection scan is exact and covers pairs of triangles that share
    no vertex; it is opt-in because it costs an intersection-detection pass.
    """
    vertices, triangles = _mesh_arrays(mesh)
    violations = []
    report = {
        "vertices": int(len(vertices)),
        "triangles": int(len(triangles)),
        "degenerate_triangles": 0,
        "open_edges": 0,
        "overused_edges": 0,
        "misoriented_edges": 0,
        "pinched": False,
        "self_intersections": 0,
        "violations": violations,
    }
    if len(triangles) == 0:
        violations.append("mesh has no triangles")
        return report
    triangles = _weld(vertices, triangles)
    degenerate = (
        (triangles[:, 0] == triangles[:, 1])
        | (triangles[:, 1] == triangles[:, 2])
        | (triangles[:, 2] == triangles[:, 0])
    )
    report["degenerate_triangles"] = int(degenerate.sum())
    if report["degenerate_triangles"]:
        violations.append(
            f"{report['degenerate_triangles']} triangles have coincident corners"
        )
        triangles = triangles[~degenerate]
        if len(triangles) == 0:
            return report
    report["pinched"] = not _links_connected(triangles)
    directed, undirected = _edge_tables(triangles)
    report["open_edges"] = sum(1 for n in undirected.values() if n < 2)
    report["overused_edges"] = sum(1 for n in undirected.values() if n > 2)
    report["misoriented_edges"] = sum(
        1
        for (u, v), n in undirected.items()
        if n == 2 and directed.get((u, v), 0) != directed.get((v, u), 0)
    )
    if report["open_edges"]:
        violations.append(f"{report['open_edges']} edges bound fewer than 2 triangles")
    if report["overused_edges"]:
        violations.append(f"{report['overused_edges']} edges bound more than 2 triangles")
    if report["misoriented_edges"]:
        violations.append(
            f"{report['misoriented_edges']} edges have inconsistent orientation"
        )
    if report["pinched"]:
        violations.append("at least one vertex pinches separate surface sheets")
    if scan_self_intersections and len(triangles) > 1:
        soup = TriangleSoup(vertices, triangles, np.zeros(len(triangles), np.int64), 1)
        aabbs = soup.aabbs()
        tree = Octree.build(aabbs)
        pairs = tree.candidate_pairs(aabbs, soup.labels, cross_only=False)
        if len(pairs):
            tri = soup.triangles
            share = np.zeros(len(pairs), bool)
            for k, (i, j) in enumerate(pairs):
                share[k] = bool(set(tri[i]) & set(tri[j]))
            pairs = pairs[~share]
        pairs = prefilter_pairs(soup, pairs)
        _, records = detect_intersections(soup, pairs)
        report["self_intersections"] = len(records)
        if records:
            violations.append(
                f"{len(records)} intersecting non-adjacent triangle pairs"
            )
    return report
