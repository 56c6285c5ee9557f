"""All-rational brute-force boolean reference.

Computes (connected components, Euler characteristic) of a boolean of two
closed triangle meshes entirely with fractions.Fraction: exhaustive pairwise
triangle intersection, an incremental exact re-triangulation of cut faces
(point insertion + constraint recovery by edge flipping — a different
algorithm from the engine's), flood-filled surface patches, and rational
crossing-parity classification.  No engine code is imported, so agreement
with the engine is meaningful.

Inputs must be in generic position: any coplanar contact, grazing touch, or
otherwise degenerate incidence raises DegenerateCorpus instead of being
resolved.  numpy is used only for conservative float prefilters; every
decision is rational.
"""

from collections import defaultdict
from fractions import Fraction
from math import inf, nextafter

import numpy as np

from _rational_oracle import (
    cross,
    dot,
    plane_of,
    sub,
    triangle_pair_segment,
)


class DegenerateCorpus(Exception):
    """The fixture is not in generic position for this reference."""


_CYCLIC = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def _cross2(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _sign(x):
    return (x > 0) - (x < 0)


def _between_1d(a, b, x):
    lo, hi = (a, b) if a <= b else (b, a)
    return lo < x < hi


def _strictly_inside_2d(p, q, x):
    """x strictly between p and q, assuming the three are collinear."""
    if p[0] != q[0]:
        return _between_1d(p[0], q[0], x[0])
    return _between_1d(p[1], q[1], x[1])


class _Tri2D:
    """Exact incremental triangulation of one projected triangle.

    Vertices are only ever the parent corners, inserted points, and nothing
    else (no Steiner points).  All triangles are kept counterclockwise; the
    class asserts area conservation so a silent bug cannot produce a
    plausible-but-wrong subdivision.
    """

    def __init__(self, corners):
        assert _cross2(*corners) > 0, "parent corners must be counterclockwise"
        self.pts = list(corners)
        self.tris = {}
        self.edges = defaultdict(set)
        self._next = 0
        self._add(0, 1, 2)

    def _add(self, i, j, k):
        t = self._next
        self._next += 1
        self.tris[t] = (i, j, k)
        for e in ((i, j), (j, k), (k, i)):
            self.edges[frozenset(e)].add(t)
        return t

    def _remove(self, t):
        i, j, k = self.tris.pop(t)
        for e in ((i, j), (j, k), (k, i)):
            key = frozenset(e)
            self.edges[key].discard(t)
            if not self.edges[key]:
                del self.edges[key]

    def add_point(self, p):
        idx = len(self.pts)
        for t in list(self.tris):
            i, j, k = self.tris[t]
            s = [
                _sign(_cross2(self.pts[a], self.pts[b], p))
                for a, b in ((i, j), (j, k), (k, i))
            ]
            if any(x < 0 for x in s):
                continue
            zeros = s.count(0)
            if zeros == 0:
                self.pts.append(p)
                self._remove(t)
                self._add(i, j, idx)
                self._add(j, k, idx)
                self._add(k, i, idx)
                return idx
            if zeros == 1:
                a, b = ((i, j), (j, k), (k, i))[s.index(0)]
                self.pts.append(p)
                for t2 in list(self.edges[frozenset((a, b))]):
                    x, y, z = self.tris[t2]
                    for _ in range(3):
                        if {x, y} == {a, b}:
                            break
                        x, y, z = y, z, x
                    self._remove(t2)
                    self._add(x, idx, z)
                    self._add(idx, y, z)
                return idx
            raise DegenerateCorpus("inserted point coincides with a vertex")
        raise DegenerateCorpus("inserted point outside the parent triangle")

    def _apex(self, t, a, b):
        """Vertex of t opposite the directed edge a->b, or None."""
        i, j, k = self.tris[t]
        for x, y, z in ((i, j, k), (j, k, i), (k, i, j)):
            if x == a and y == b:
                return z
        return None

    def insert_segment(self, u, v):
        pu, pv = self.pts[u], self.pts[v]
        key = frozenset((u, v))
        guard = 0
        while key not in self.edges:
            guard += 1
            assert guard <= 4 * len(self.tris) + 64, "constraint recovery stalled"
            flipped = False
            for e in list(self.edges):
                if u in e or v in e:
                    continue
                a, b = tuple(e)
                pa, pb = self.pts[a], self.pts[b]
                sa = _sign(_cross2(pu, pv, pa))
                sb = _sign(_cross2(pu, pv, pb))
                if sa == 0 and _strictly_inside_2d(pu, pv, pa):
                    raise DegenerateCorpus("vertex on a constraint segment")
                if sb == 0 and _strictly_inside_2d(pu, pv, pb):
                    raise DegenerateCorpus("vertex on a constraint segment")
                if sa * sb >= 0:
                    continue
                if _sign(_cross2(pa, pb, pu)) * _sign(_cross2(pa, pb, pv)) >= 0:
                    continue
                ts = self.edges[e]
                assert len(ts) == 2, "constraint crosses the triangle boundary"
                t1 = t2 = None
                for t in ts:
                    if self._apex(t, a, b) is not None:
                        t1 = t
                    else:
                        t2 = t
                c = self._apex(t1, a, b)
                d = self._apex(t2, b, a)
                pc, pd = self.pts[c], self.pts[d]
                if _sign(_cross2(pc, pd, pa)) * _sign(_cross2(pc, pd, pb)) >= 0:
                    continue  # quad not strictly convex: flip another edge first
                self._remove(t1)
                self._remove(t2)
                assert _cross2(pc, pa, pd) > 0 and _cross2(pd, pb, pc) > 0
                self._add(c, a, d)
                self._add(d, b, c)
                flipped = True
                break
            assert flipped, "no flippable edge crosses the constraint"

    def audit(self):
        total = Fraction(0)
        for i, j, k in self.tris.values():
            a2 = _cross2(self.pts[i], self.pts[j], self.pts[k])
            assert a2 > 0, "degenerate or inverted sub-triangle"
            total += a2
        assert total == _cross2(self.pts[0], self.pts[1], self.pts[2]), (
            "subdivision does not tile the parent triangle"
        )


def _subdivide(corners, segments):
    """Exact sub-triangulation of one 3D triangle constrained by segments.

    corners: three exact 3D points; segments: pairs of exact 3D endpoints
    lying in the closed triangle.  Returns sub-triangles as triples of exact
    3D points.
    """
    n = cross(sub(corners[1], corners[0]), sub(corners[2], corners[0]))
    axis = max(range(3), key=lambda k: abs(n[k]))
    u, v = _CYCLIC[axis]
    if n[axis] < 0:
        u, v = v, u

    def proj(p):
        return (p[u], p[v])

    pts3 = list(corners)
    tri = _Tri2D([proj(p) for p in corners])
    idx_of = {corners[0]: 0, corners[1]: 1, corners[2]: 2}

    def ensure(p):
        i = idx_of.get(p)
        if i is None:
            i = tri.add_point(proj(p))
            assert i == len(pts3)
            pts3.append(p)
            idx_of[p] = i
        return i

    pairs = [(ensure(a), ensure(b)) for a, b in segments]
    for ia, ib in pairs:
        if ia == ib:
            raise DegenerateCorpus("zero-length intersection segment")
        tri.insert_segment(ia, ib)
    for ia, ib in pairs:
        assert frozenset((ia, ib)) in tri.edges, "constraint lost after flips"
    tri.audit()
    return [(pts3[i], pts3[j], pts3[k]) for i, j, k in tri.tris.values()]


class _Side:
    """One input mesh: exact triangles, float prefilter arrays, collected
    constraint segments, and the subdivision they induce."""

    def __init__(self, mesh):
        v = np.asarray(mesh[0], np.float64).reshape(-1, 3)
        f = np.asarray(mesh[1], np.int64).reshape(-1, 3)
        verts = [tuple(Fraction(x) for x in row) for row in v.tolist()]
        self.triangles = []
        seen = set()
        for i, j, k in f.tolist():
            a, b, c = verts[i], verts[j], verts[k]
            if cross(sub(b, a), sub(c, a)) == (0, 0, 0):
                continue  # degenerate facet: no surface area, drop it
            key = frozenset((a, b, c))
            if key in seen:
                raise DegenerateCorpus("duplicate facet")
            seen.add(key)
            self.triangles.append((a, b, c))
        if not self.triangles:
            raise DegenerateCorpus("input mesh has no usable facets")
        flat = np.array(
            [[[float(x) for x in p] for p in t] for t in self.triangles]
        )
        self.aabb_lo = flat.min(axis=1)
        self.aabb_hi = flat.max(axis=1)
        self.segments = defaultdict(list)
        self._planes = {}

    def plane(self, t):
        pl = self._planes.get(t)
        if pl is None:
            pl = self._planes[t] = plane_of(*self.triangles[t])
        return pl

    def subdivide(self):
        """List of (sub-triangle, source-triangle-index) for the whole mesh."""
        out = []
        for t, corners in enumerate(self.triangles):
            segs = self.segments.get(t)
            if not segs:
                out.append((corners, t))
                continue
            for piece in _subdivide(corners, segs):
                out.append((piece, t))
        return out


def _aabb_pairs(a, b):
    """Indices (i, j) of overlapping float AABBs, exhaustively."""
    pairs = []
    step = max(1, 2_000_000 // max(1, len(b.aabb_lo)))
    for start in range(0, len(a.aabb_lo), step):
        lo = a.aabb_lo[start : start + step]
        hi = a.aabb_hi[start : start + step]
        m = np.ones((len(lo), len(b.aabb_lo)), bool)
        for k in range(3):
            m &= lo[:, k : k + 1] <= b.aabb_hi[None, :, k]
            m &= hi[:, k : k + 1] >= b.aabb_lo[None, :, k]
        ii, jj = np.nonzero(m)
        pairs.extend(zip((ii + start).tolist(), jj.tolist()))
    return pairs


def _point_in_triangle_proj(x, a, b, c, axis):
    """'in' / 'on' / 'out' of the projection of x against projected abc."""
    u, v = _CYCLIC[axis]
    pa, pb, pc, px = (
        (p[u], p[v]) for p in (a, b, c, x)
    )
    orient = _sign(_cross2(pa, pb, pc))
    if orient == 0:
        raise DegenerateCorpus("ray parallel to a candidate triangle")
    signs = [
        _sign(_cross2(p, q, px)) * orient
        for p, q in ((pa, pb), (pb, pc), (pc, pa))
    ]
    if any(s < 0 for s in signs):
        return "out"
    if any(s == 0 for s in signs):
        return "on"
    return "in"


class _RayDegenerate(Exception):
    pass


def _parity_along_axis(p, other, axis):
    """Crossing parity of the +axis ray from exact point p against `other`.

    Conservative float prefilter on the two fixed coordinates, exact
    rational decisions on the survivors.  Raises _RayDegenerate on any
    grazing incidence.
    """
    u, v = _CYCLIC[axis]
    pf = [q.numerator / q.denominator if q else 0.0 for q in p]
    lo_u, hi_u = nextafter(pf[u], -inf), nextafter(pf[u], inf)
    lo_v, hi_v = nextafter(pf[v], -inf), nextafter(pf[v], inf)
    cand = np.nonzero(
        (other.aabb_lo[:, u] <= hi_u)
        & (other.aabb_hi[:, u] >= lo_u)
        & (other.aabb_lo[:, v] <= hi_v)
        & (other.aabb_hi[:, v] >= lo_v)
        & (other.aabb_hi[:, axis] >= nextafter(pf[axis], -inf))
    )[0]
    crossings = 0
    for t in cand.tolist():
        a, b, c = other.triangles[t]
        n, d = other.plane(t)
        dn = n[axis]
        f = d - dot(n, p)
        if dn == 0:
            if f == 0:
                raise _RayDegenerate("ray origin in the plane of a parallel facet")
            continue
        t_hit = Fraction(f, 1) / dn
        if t_hit < 0:
            continue
        if t_hit == 0:
            raise _RayDegenerate("ray origin on the other surface")
        x = list(p)
        x[axis] = p[axis] + t_hit
        loc = _point_in_triangle_proj(tuple(x), a, b, c, axis)
        if loc == "on":
            raise _RayDegenerate("ray grazes an edge or vertex")
        if loc == "in":
            crossings += 1
    return crossings % 2 == 1


def _centroid(tri):
    return tuple((tri[0][k] + tri[1][k] + tri[2][k]) / 3 for k in range(3))


def _inside_other(patch_tris, other):
    """Is a surface patch strictly inside the other closed mesh?"""
    for seed in patch_tris[: min(len(patch_tris), 8)]:
        p = _centroid(seed)
        for axis in (2, 1, 0):
            try:
                return _parity_along_axis(p, other, axis)
            except _RayDegenerate:
                continue
    raise DegenerateCorpus("no clean classification ray for a patch")


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def unite(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _edge_keys(tri):
    a, b, c = tri
    return (frozenset((a, b)), frozenset((b, c)), frozenset((c, a)))


def _group_patches(subtris, constraint_edges):
    """Connected components of the subdivision, not crossing constraint
    (intersection-curve) edges.  Returns a list of lists of sub-triangles."""
    uf = _UnionFind(len(subtris))
    owner = {}
    for i, (tri, _src) in enumerate(subtris):
        for e in _edge_keys(tri):
            if e in constraint_edges:
                continue
            j = owner.get(e)
            if j is None:
                owner[e] = i
            else:
                uf.unite(i, j)
    groups = defaultdict(list)
    for i, (tri, _src) in enumerate(subtris):
        groups[uf.find(i)].append(tri)
    return list(groups.values())


_KEEP = {
    # op -> (keep rule for first-mesh patches, for second-mesh patches),
    # each a function of `inside the other mesh`
    "union": (lambda ins: not ins, lambda ins: not ins),
    "intersection": (lambda ins: ins, lambda ins: ins),
    "difference": (lambda ins: not ins, lambda ins: ins),
}


def reference_boolean(op, mesh_a, mesh_b):
    """(components, Euler characteristic) of op(A, B), all-rational.

    Accepts float (vertices, triangles) pairs in generic relative position.
    """
    keep_a, keep_b = _KEEP[op]
    a, b = _Side(mesh_a), _Side(mesh_b)

    constraint_edges = set()
    for i, j in _aabb_pairs(a, b):
        hit = triangle_pair_segment(a.triangles[i], b.triangles[j])
        if hit is None:
            continue
        if hit == "coplanar":
            raise DegenerateCorpus("coplanar triangle pair")
        if hit[0] == "point":
            raise DegenerateCorpus("triangles touch at a single point")
        _, pa, pb = hit
        a.segments[i].append((pa, pb))
        b.segments[j].append((pa, pb))
        constraint_edges.add(frozenset((pa, pb)))

    kept = []
    for side, other, rule in ((a, b, keep_a), (b, a, keep_b)):
        subtris = side.subdivide()
        for patch in _group_patches(subtris, constraint_edges):
            if rule(_inside_other(patch, other)):
                kept.extend(patch)

    if not kept:
        return 0, 0

    verts = set()
    edges = set()
    uf = _UnionFind(len(kept))
    owner = {}
    for i, tri in enumerate(kept):
        verts.update(tri)
        for e in _edge_keys(tri):
            edges.add(e)
            j = owner.get(e)
            if j is None:
                owner[e] = i
            else:
                uf.unite(i, j)
    components = len({uf.find(i) for i in range(len(kept))})
    euler = len(verts) - len(edges) + len(kept)
    return components, euler
