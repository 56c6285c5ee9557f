"""Exact arrangement of a triangle soup.

Every pair of triangles from different input meshes whose boxes overlap is
tested exactly; the intersection (a point, a segment on the common plane
line, or a coplanar overlap polygon) is recorded on both triangles as
constraints.  Each constrained triangle is then retriangulated canonically
(:mod:`meshbool.triangulate`) and the pieces are stitched into one
simplicial complex with globally deduplicated vertices, per-triangle mesh
membership bitsets, and flagged intersection edges.

Intersection points are kept implicit (defined by the floats of a line and
a plane, or three planes) and are never rounded inside the pipeline; the
output coordinates of new vertices are the correctly rounded doubles of
their exact rational positions.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernel
from .errors import InvariantViolation
from .kernel import ExplicitPoint3, ImplicitPointLPI
from .octree import Octree, triangle_aabbs
from .triangulate import (
    _canon_pair,
    _construct_crossing,
    _witness_coords,
    choose_frame,
    triangulate_constrained,
)

_U = 2.0**-53
_MINOR_K = 3.000000000000004


class VertexPoint(ExplicitPoint3):
    """Explicit point that remembers its soup vertex id."""

    __slots__ = ("vid",)

    def __init__(self, x, y, z, vid):
        super().__init__(x, y, z)
        self.vid = vid

    def __repr__(self):
        return f"VertexPoint({self.x}, {self.y}, {self.z}, vid={self.vid})"


class TriangleConstraints:
    __slots__ = ("segments", "points")

    def __init__(self):
        self.segments = []  # (pa, pb, line, flagged)
        self.points = []


class ArrangementStats:
    __slots__ = (
        "candidate_pairs",
        "tested_pairs",
        "intersecting_pairs",
        "affected_triangles",
        "implicit_points",
        "octree_seconds",
        "detect_seconds",
        "triangulate_seconds",
        "assemble_seconds",
    )

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def snapshot(self):
        return {name: getattr(self, name) for name in self.__slots__}


class Arrangement:
    """The arranged complex: soup vertices followed by implicit intersection
    vertices, sub-triangles with parent/mesh bookkeeping, and the edge table
    with intersection flags."""

    def __init__(
        self,
        soup,
        vertices,
        n_explicit,
        implicit_points,
        triangles,
        parents,
        labels,
        flips,
        edges,
        edge_tris,
        edge_flagged,
    ):
        self.soup = soup
        self.vertices = vertices
        self.n_explicit = n_explicit
        self.implicit_points = implicit_points  # list indexed by gid - n_explicit
        self.triangles = triangles
        self.parents = parents
        self.labels = labels  # (M, lanes) uint64 mesh-membership bitsets
        self.flips = flips  # (M, lanes) uint64: mesh copy wound opposite
        self.edges = edges
        self.edge_tris = edge_tris  # (E, 2) incident triangles, -1 = none
        self.edge_flagged = edge_flagged
        self.n_inputs = soup.n_inputs
        self.lanes = labels.shape[1]

    def point_of(self, gid):
        if gid >= self.n_explicit:
            return self.implicit_points[gid - self.n_explicit]
        v = self.vertices[gid]
        return VertexPoint(float(v[0]), float(v[1]), float(v[2]), int(gid))

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def flagged_edges(self):
        return self.edges[self.edge_flagged]


# ---------------------------------------------------------------------------
# pair detection


def _vertex_point(soup, vid):
    v = soup.vertices[vid]
    return VertexPoint(float(v[0]), float(v[1]), float(v[2]), int(vid))


def _tri_coords(soup, t):
    a, b, c = soup.triangles[t]
    V = soup.vertices
    return (
        (float(V[a, 0]), float(V[a, 1]), float(V[a, 2])),
        (float(V[b, 0]), float(V[b, 1]), float(V[b, 2])),
        (float(V[c, 0]), float(V[c, 1]), float(V[c, 2])),
    )


def _cache_of(soup, caches, t):
    c = caches.get(t)
    if c is None:
        c = caches[t] = kernel.make_plane_cache(*_tri_coords(soup, t))
    return c


def prefilter_pairs(soup, pairs):
    """Drop pairs whose second triangle is certainly strictly on one side of
    the first one's plane (vectorized version of the cached orientation
    filter; rejections are certified, survivors go to the exact path)."""
    if len(pairs) == 0:
        return pairs
    V = soup.vertices
    T = soup.triangles
    A = V[T[pairs[:, 0], 0]]
    B = V[T[pairs[:, 0], 1]]
    C = V[T[pairs[:, 0], 2]]

    t1 = B[:, 1] - A[:, 1]
    t2 = C[:, 2] - A[:, 2]
    t3 = B[:, 2] - A[:, 2]
    t4 = C[:, 1] - A[:, 1]
    myz = t1 * t2 - t3 * t4
    kyz = _MINOR_K * (np.abs(t1 * t2) + np.abs(t3 * t4))
    s1 = B[:, 0] - A[:, 0]
    s2 = C[:, 0] - A[:, 0]
    mxz = s1 * t2 - t3 * s2
    kxz = _MINOR_K * (np.abs(s1 * t2) + np.abs(t3 * s2))
    mxy = s1 * t4 - t1 * s2
    kxy = _MINOR_K * (np.abs(s1 * t4) + np.abs(t1 * s2))
    p1 = B[:, 1] * C[:, 2]
    p2 = B[:, 2] * C[:, 1]
    p3 = B[:, 0] * C[:, 2]
    p4 = B[:, 2] * C[:, 0]
    p5 = B[:, 0] * C[:, 1]
    p6 = B[:, 1] * C[:, 0]
    mxyz = A[:, 0] * (p1 - p2) - A[:, 1] * (p3 - p4) + A[:, 2] * (p5 - p6)
    kxyz = 8.0 * (
        np.abs(A[:, 0]) * (np.abs(p1) + np.abs(p2))
        + np.abs(A[:, 1]) * (np.abs(p3) + np.abs(p4))
        + np.abs(A[:, 2]) * (np.abs(p5) + np.abs(p6))
    )

    all_pos = np.ones(len(pairs), dtype=bool)
    all_neg = np.ones(len(pairs), dtype=bool)
    for corner in range(3):
        P = V[T[pairs[:, 1], corner]]
        q1 = P[:, 0] * myz
        q2 = P[:, 1] * mxz
        q3 = P[:, 2] * mxy
        det = -q1 + q2 - q3 + mxyz
        err = _U * (
            np.abs(P[:, 0]) * kyz
            + np.abs(P[:, 1]) * kxz
            + np.abs(P[:, 2]) * kxy
            + kxyz
            + 4.0 * (np.abs(q1) + np.abs(q2) + np.abs(q3) + np.abs(mxyz))
        )
        all_pos &= det > err
        all_neg &= det < -err
    return pairs[~(all_pos | all_neg)]


def _span_points(soup, t_self, t_other, signs):
    """Points where triangle t_self meets the supporting plane of t_other;
    signs are the exact orientations of t_self's corners against that plane.
    0, 1 or 2 points (2 when the triangle crosses or an edge lies on it)."""
    tri = soup.triangles[t_self]
    pts = [
        _vertex_point(soup, tri[k]) for k in range(3) if signs[k] == 0
    ]
    if any(s > 0 for s in signs) and any(s < 0 for s in signs):
        oc = sorted(_tri_coords(soup, t_other))
        V = soup.vertices
        for k1, k2 in ((0, 1), (1, 2), (0, 2)):
            if signs[k1] * signs[k2] < 0:
                a = (
                    float(V[tri[k1], 0]),
                    float(V[tri[k1], 1]),
                    float(V[tri[k1], 2]),
                )
                b = (
                    float(V[tri[k2], 0]),
                    float(V[tri[k2], 1]),
                    float(V[tri[k2], 2]),
                )
                a, b = _canon_pair(a, b)
                pts.append(ImplicitPointLPI(a, b, *oc))
    return pts


def _line_axis(ci, cj):
    """First axis on which the direction of the planes' intersection line
    has an exactly nonzero component; None when the planes are parallel."""
    mi = ci.exact_minors()
    mj = cj.exact_minors()
    ni = (mi[0], -mi[1], mi[2])
    nj = (mj[0], -mj[1], mj[2])
    if ni[1] * nj[2] - ni[2] * nj[1] != 0:
        return 0
    if ni[2] * nj[0] - ni[0] * nj[2] != 0:
        return 1
    if ni[0] * nj[1] - ni[1] * nj[0] != 0:
        return 2
    return None


def _order_pair(pts, axis):
    if len(pts) == 1:
        return pts[0], pts[0]
    a, b = pts
    if int(kernel.compare_on_axis(a, b, axis)) <= 0:
        return a, b
    return b, a


def _overlap_on_line(span_a, span_b, axis):
    lo_a, hi_a = _order_pair(span_a, axis)
    lo_b, hi_b = _order_pair(span_b, axis)
    lo = lo_a if int(kernel.compare_on_axis(lo_a, lo_b, axis)) >= 0 else lo_b
    hi = hi_a if int(kernel.compare_on_axis(hi_a, hi_b, axis)) <= 0 else hi_b
    c = int(kernel.compare_on_axis(lo, hi, axis))
    if c > 0:
        return None
    if c == 0:
        return ("point", lo)
    return ("segment", lo, hi)


def _add_point(soup, cons, t, p):
    if isinstance(p, VertexPoint) and p.vid in soup.triangles[t]:
        return  # already a corner of this triangle
    cons.setdefault(t, TriangleConstraints()).points.append(p)


def _add_segment(soup, cons, t, pa, pb, line, flagged=True):
    cons.setdefault(t, TriangleConstraints()).segments.append(
        (pa, pb, line, flagged)
    )


def _plane_key(soup, t):
    return ("plane",) + tuple(sorted(_tri_coords(soup, t)))


def _process_pair(soup, caches, cons, records, i, j):
    ti = soup.triangles[i]
    tj = soup.triangles[j]
    if len(set(ti) & set(tj)) == 3:
        records.append((i, j, "coincident"))
        return

    ci = _cache_of(soup, caches, i)
    sj = [
        int(kernel.orient3d_cached(ci, _vertex_point(soup, v))) for v in tj
    ]
    if all(s == 0 for s in sj):
        _coplanar_pair(soup, caches, cons, records, i, j)
        return
    if all(s > 0 for s in sj) or all(s < 0 for s in sj):
        return
    span_j = _span_points(soup, j, i, sj)
    if not span_j:
        return

    cj = _cache_of(soup, caches, j)
    si = [
        int(kernel.orient3d_cached(cj, _vertex_point(soup, v))) for v in ti
    ]
    if all(s > 0 for s in si) or all(s < 0 for s in si):
        return
    span_i = _span_points(soup, i, j, si)
    if not span_i:
        return

    axis = _line_axis(ci, cj)
    if axis is None:
        raise InvariantViolation("parallel planes with mixed orientations")
    ov = _overlap_on_line(span_i, span_j, axis)
    if ov is None:
        return
    if ov[0] == "point":
        _add_point(soup, cons, i, ov[1])
        _add_point(soup, cons, j, ov[1])
        records.append((i, j, "point"))
        return
    lo, hi = ov[1], ov[2]
    _add_segment(soup, cons, i, lo, hi, _plane_key(soup, j))
    _add_segment(soup, cons, j, lo, hi, _plane_key(soup, i))
    records.append((i, j, "segment"))


# ---------------------------------------------------------------------------
# coplanar pairs: exact overlap polygon by half-plane clipping


def _coplanar_pair(soup, caches, cons, records, i, j):
    ci = _cache_of(soup, caches, i)
    parent = _tri_coords(soup, i)
    frame = choose_frame(ci, parent)
    w = _witness_coords(frame)

    corners_i = [_vertex_point(soup, v) for v in soup.triangles[i]]
    subject = [_vertex_point(soup, v) for v in soup.triangles[j]]
    if frame.ccw(subject[0], subject[1], subject[2]) < 0:
        subject = [subject[0], subject[2], subject[1]]

    # supporting lines of all six original edges; every edge of every
    # intermediate and final clip polygon lies on one of them
    candidates = []
    for tri_pts in (corners_i, subject):
        for k in range(3):
            a, b = tri_pts[k], tri_pts[(k + 1) % 3]
            line = ("edge",) + _canon_pair(a.approx(), b.approx()) + (w,)
            candidates.append((line, a, b))

    pts = list(subject)
    for k in range(3):
        if not pts:
            break
        ca, cb = corners_i[k], corners_i[(k + 1) % 3]
        clip_line = candidates[k][0]
        pts = _clip_step(frame, pts, ca, cb, clip_line, candidates)

    pts = _dedup_cycle(frame, pts)
    if not pts:
        return
    if len(pts) == 1:
        _add_point(soup, cons, i, pts[0])
        _add_point(soup, cons, j, pts[0])
        records.append((i, j, "coplanar-point"))
        return

    if len(pts) == 2:
        seg = (pts[0], pts[1])
    else:
        seg = _collapse_if_collinear(frame, pts)
    if seg is not None:
        line = _find_edge_line(frame, candidates, seg[0], seg[1])
        _add_segment(soup, cons, i, seg[0], seg[1], line)
        _add_segment(soup, cons, j, seg[0], seg[1], line)
        records.append((i, j, "coplanar-segment"))
        return

    for k in range(len(pts)):
        p, q = pts[k], pts[(k + 1) % len(pts)]
        line = _find_edge_line(frame, candidates, p, q)
        _add_segment(soup, cons, i, p, q, line)
        _add_segment(soup, cons, j, p, q, line)
    records.append((i, j, "coplanar-overlap"))


def _clip_step(frame, pts, ca, cb, clip_line, candidates):
    """Sutherland–Hodgman step against the inside of the directed line
    (ca, cb); crossing points are constructed exactly from the supporting
    lines of the two edges that meet there."""
    n = len(pts)
    signs = [frame.ccw(ca, cb, p) for p in pts]
    out = []
    for k in range(n):
        p = pts[k]
        q = pts[(k + 1) % n]
        sp, sq = signs[k], signs[(k + 1) % n]
        if sp * sq < 0:
            line_pq = _find_edge_line(frame, candidates, p, q)
            x = _construct_crossing(frame, line_pq, clip_line)
            out.append(x)
        if sq >= 0:
            out.append(q)
    return out


def _dedup_cycle(frame, pts):
    out = []
    for p in pts:
        if out and frame.same_2d(out[-1], p):
            continue
        out.append(p)
    while len(out) > 1 and frame.same_2d(out[0], out[-1]):
        out.pop()
    return out


def _collapse_if_collinear(frame, pts):
    for k in range(2, len(pts)):
        if frame.orient(pts[0], pts[1], pts[k]) != 0:
            return None
    lo = hi = pts[0]
    for p in pts[1:]:
        if frame.cmp_2d(p, lo) < 0:
            lo = p
        if frame.cmp_2d(p, hi) > 0:
            hi = p
    return lo, hi


def _find_edge_line(frame, candidates, p, q):
    best = None
    for line, a, b in candidates:
        if frame.orient(a, b, p) == 0 and frame.orient(a, b, q) == 0:
            if best is None or line < best:
                best = line
    if best is None:
        raise InvariantViolation("overlap edge lies on no original line")
    return best


def detect_intersections(soup, pairs, caches=None):
    """Run the exact pair tests; returns (constraints by triangle, records)."""
    if caches is None:
        caches = {}
    cons = {}
    records = []
    for i, j in pairs:
        _process_pair(soup, caches, cons, records, int(i), int(j))
    return cons, records


# ---------------------------------------------------------------------------
# assembly


class _VertexIndex:
    """Bitwise lookup of explicit vertex rows (the preprocess stage has
    already normalized -0.0 and deduplicated)."""

    def __init__(self, vertices):
        self._view = np.ascontiguousarray(vertices).view(
            np.dtype((np.void, vertices.dtype.itemsize * 3))
        ).ravel()
        self._order = np.argsort(self._view)
        self._sorted = self._view[self._order]

    def find(self, coords):
        probe = np.array(coords, dtype=np.float64).view(
            np.dtype((np.void, 24))
        )[0]
        k = np.searchsorted(self._sorted, probe)
        if k < len(self._sorted) and self._sorted[k] == probe:
            return int(self._order[k])
        return -1


def _triple_parity_even(t, ref):
    """Do triples t and ref (same id set) have the same cyclic orientation?"""
    a, b, c = t
    x, y, z = ref
    if a == x:
        return (b, c) == (y, z)
    if a == y:
        return (b, c) == (z, x)
    return (b, c) == (x, y)


def assemble(soup, results):
    """Stitch per-triangle triangulations into the global complex.

    results: dict parent triangle id -> Triangulation.
    """
    n_explicit = soup.n_vertices
    affected = sorted(results)
    id_of = {}
    implicit_pts = []
    bucket = {}
    vindex = _VertexIndex(soup.vertices) if affected else None

    def register(p):
        key = id(p)
        g = id_of.get(key)
        if g is not None:
            return g
        if isinstance(p, VertexPoint):
            id_of[key] = p.vid
            return p.vid
        ap = p.approx()
        vid = vindex.find(ap)
        if vid >= 0 and kernel.points_equal(p, ExplicitPoint3(*ap)):
            id_of[key] = vid
            return vid
        for g2 in bucket.get(ap, ()):
            if kernel.points_equal(p, implicit_pts[g2 - n_explicit]):
                id_of[key] = g2
                return g2
        g = n_explicit + len(implicit_pts)
        implicit_pts.append(p)
        bucket.setdefault(ap, []).append(g)
        id_of[key] = g
        return g

    sub_rows = []
    sub_parents = []
    flag_pairs = set()
    for t in affected:
        r = results[t]
        for pa, pb, pc in r.triangles:
            sub_rows.append((register(pa), register(pb), register(pc)))
            sub_parents.append(t)
        for pa, pb in r.flagged_edges:
            a, b = register(pa), register(pb)
            if a != b:
                flag_pairs.add((a, b) if a < b else (b, a))

    untouched = np.ones(soup.n_triangles, dtype=bool)
    if affected:
        untouched[np.array(affected)] = False
    ut_ids = np.nonzero(untouched)[0]

    if sub_rows:
        tris = np.concatenate(
            [soup.triangles[ut_ids], np.array(sub_rows, dtype=np.int64)]
        )
        parents = np.concatenate([ut_ids, np.array(sub_parents, dtype=np.int64)])
        order = np.argsort(parents, kind="stable")
        tris = tris[order]
        parents = parents[order]
    else:
        tris = soup.triangles[ut_ids].copy()
        parents = ut_ids.copy()

    degenerate = (
        (tris[:, 0] == tris[:, 1])
        | (tris[:, 1] == tris[:, 2])
        | (tris[:, 0] == tris[:, 2])
    )
    if degenerate.any():
        raise InvariantViolation("degenerate sub-triangle after assembly")

    m = len(tris)
    lanes = (soup.n_inputs + 63) // 64
    mesh_of = soup.labels[parents]
    labels = np.zeros((m, lanes), dtype=np.uint64)
    flips = np.zeros((m, lanes), dtype=np.uint64)
    labels[np.arange(m), mesh_of >> 6] = np.uint64(1) << (
        mesh_of & 63
    ).astype(np.uint64)

    # merge exactly coincident triangles (same global vertex id set)
    key = np.sort(tris, axis=1)
    order2 = np.lexsort((key[:, 2], key[:, 1], key[:, 0]))
    sk = key[order2]
    same = np.all(sk[1:] == sk[:-1], axis=1)
    keep = np.ones(m, dtype=bool)
    run = 0
    while run < m:
        end = run
        while end < m - 1 and same[end]:
            end += 1
        if end > run:
            group = sorted(order2[run : end + 1])
            kept = group[0]
            for member in group[1:]:
                if (labels[kept] & labels[member]).any():
                    raise InvariantViolation(
                        "coincident triangles within one input mesh"
                    )
                keep[member] = False
                labels[kept] |= labels[member]
                if not _triple_parity_even(
                    tuple(tris[member]), tuple(tris[kept])
                ):
                    flips[kept] |= labels[member]
        run = end + 1

    tris = tris[keep]
    parents = parents[keep]
    labels = labels[keep]
    flips = flips[keep]
    m = len(tris)

    # edge table and intersection flags
    e = np.concatenate([tris[:, (0, 1)], tris[:, (1, 2)], tris[:, (2, 0)]])
    e.sort(axis=1)
    edges, inverse, counts = np.unique(
        e, axis=0, return_inverse=True, return_counts=True
    )
    order3 = np.argsort(inverse, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)])
    edge_tris = np.full((len(edges), 2), -1, dtype=np.int64)
    edge_tris[:, 0] = order3[starts[:-1]] % m
    two = counts >= 2
    edge_tris[two, 1] = order3[starts[:-1][two] + 1] % m

    flagged = counts != 2
    pair2 = counts == 2
    t1 = edge_tris[pair2, 0]
    t2 = edge_tris[pair2, 1]
    diff = np.any(labels[t1] != labels[t2], axis=1) | np.any(
        flips[t1] != flips[t2], axis=1
    )
    flagged[pair2] |= diff

    if flag_pairs:
        fp = np.array(sorted(flag_pairs), dtype=np.int64)
        scale = np.int64(n_explicit + len(implicit_pts))
        code = edges[:, 0] * scale + edges[:, 1]
        fcode = fp[:, 0] * scale + fp[:, 1]
        pos = np.searchsorted(code, fcode)
        ok = (pos < len(code)) & (code[np.minimum(pos, len(code) - 1)] == fcode)
        if not ok.all():
            raise InvariantViolation("flagged edge missing from edge table")
        flagged[pos] = True

    if implicit_pts:
        extra = np.array([p.approx() for p in implicit_pts], dtype=np.float64)
        vertices = np.vstack([soup.vertices, extra])
    else:
        vertices = soup.vertices.copy()

    return Arrangement(
        soup,
        vertices,
        n_explicit,
        implicit_pts,
        tris,
        parents,
        labels,
        flips,
        edges,
        edge_tris,
        flagged,
    )


# ---------------------------------------------------------------------------
# driver


def arrange(
    soup,
    leaf_capacity=None,
    max_depth=None,
    threads=1,
    stats=None,
):
    """Full arrangement of a preprocessed soup."""
    if stats is None:
        stats = ArrangementStats()

    t0 = time.perf_counter()
    aabbs = soup.aabbs()
    kwargs = {}
    if leaf_capacity is not None:
        kwargs["leaf_capacity"] = leaf_capacity
    if max_depth is not None:
        kwargs["max_depth"] = max_depth
    tree = Octree.build(aabbs, **kwargs)
    pairs = tree.candidate_pairs(aabbs, soup.labels, cross_only=True)
    stats.octree_seconds += time.perf_counter() - t0
    stats.candidate_pairs += len(pairs)

    t0 = time.perf_counter()
    pairs = prefilter_pairs(soup, pairs)
    stats.tested_pairs += len(pairs)
    caches = {}
    cons, records = detect_intersections(soup, pairs, caches)
    stats.detect_seconds += time.perf_counter() - t0
    stats.intersecting_pairs += len(records)
    stats.affected_triangles += len(cons)

    t0 = time.perf_counter()
    affected = sorted(cons)

    def run_one(t):
        corners = [_vertex_point(soup, v) for v in soup.triangles[t]]
        tc = cons[t]
        return triangulate_constrained(
            corners, tc.segments, tc.points, _cache_of(soup, caches, t)
        )

    if threads > 1 and len(affected) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(run_one, affected))
        results = dict(zip(affected, outs))
    else:
        results = {t: run_one(t) for t in affected}
    stats.triangulate_seconds += time.perf_counter() - t0

    t0 = time.perf_counter()
    arr = assemble(soup, results)
    stats.assemble_seconds += time.perf_counter() - t0
    stats.implicit_points += len(arr.implicit_points)
    arr.records = records
    arr.stats = stats
    return arr, tree
