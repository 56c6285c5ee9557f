"""Canonical constrained triangulation of one input triangle.

Given a triangle and the exact constraint points/segments collected on it,
produce sub-triangles whose union tiles the triangle exactly, whose vertex
set is the corners plus the (deduplicated) constraint points and segment
crossings, and whose edges embed every constraint segment.

Everything is decided by exact predicates and every tie is broken by the
canonical coordinate order of the points involved, so two coincident
coplanar triangles carrying the same constraint geometry triangulate
identically — the property the assembler relies on to merge them.

No interior Steiner points are invented; the only new points are proper
crossings between constraint segments, which belong to the arrangement.
Faces of the constraint graph may be non-convex, carry holes (closed
constraint loops) or dangling segments; each face region is triangulated by
peeling empty triangles off its directed boundary multiset, which handles
holes and dangling (doubled) edges without bridges or ear-clipping.

Constraint segments carry a supporting-line descriptor used to construct
crossing points exactly:

    ("edge", a, b, w)     line through explicit points a, b; w is an
                          explicit witness off the parent plane, so the
                          plane (a, b, w) cuts the parent plane in exactly
                          this line
    ("plane", t0, t1, t2) the intersection line of the parent plane with
                          the plane through explicit points t0, t1, t2

All payloads are float coordinate triples.
"""

from __future__ import annotations

from collections import Counter
from functools import cmp_to_key

from . import kernel
from .errors import InvariantViolation
from .kernel import ImplicitPointLPI, ImplicitPointTPI

_KEPT = ((1, 2), (0, 2), (0, 1))


class Frame:
    """Exact 2D view of a triangle's plane: a dropped axis plus the parent
    orientation sign in that projection."""

    __slots__ = ("axis", "u", "v", "sigma", "parent")

    def __init__(self, axis, sigma, parent):
        self.axis = axis
        self.u, self.v = _KEPT[axis]
        self.sigma = sigma  # sign of the parent triangle's projected area
        self.parent = parent  # parent corner coordinate triples

    def orient(self, a, b, c):
        return int(kernel.orient2d_projected(a, b, c, self.axis))

    def ccw(self, a, b, c):
        """Orientation relative to the parent winding."""
        return self.sigma * self.orient(a, b, c)

    def cmp_u(self, p, q):
        return int(kernel.compare_on_axis(p, q, self.u))

    def cmp_v(self, p, q):
        return int(kernel.compare_on_axis(p, q, self.v))

    def same_2d(self, p, q):
        return self.cmp_u(p, q) == 0 and self.cmp_v(p, q) == 0

    def cmp_2d(self, p, q):
        c = self.cmp_u(p, q)
        return c if c else self.cmp_v(p, q)

    def between_on_line(self, p, a, b):
        """Is p strictly between a and b, all three assumed collinear?"""
        if self.cmp_u(a, b) != 0:
            s1, s2 = self.cmp_u(p, a), self.cmp_u(p, b)
        else:
            s1, s2 = self.cmp_v(p, a), self.cmp_v(p, b)
        return s1 != 0 and s2 != 0 and s1 != s2


def choose_frame(cache, parent):
    """Pick a projection axis whose exact plane minor is nonzero, preferring
    the float-largest; returns a Frame with the exact orientation sign."""
    minors = (cache.myz, cache.mxz, cache.mxy)
    errs = (cache.kyz, cache.kxz, cache.kxy)
    order = sorted(range(3), key=lambda k: -abs(minors[k]))
    exact = None
    for k in order:
        if abs(minors[k]) > errs[k] * 2.0**-53:
            return Frame(k, 1 if minors[k] > 0 else -1, parent)
        if exact is None:
            exact = cache.exact_minors()
        if exact[k] != 0:
            return Frame(k, 1 if exact[k] > 0 else -1, parent)
    raise InvariantViolation("degenerate triangle reached triangulation")


class _Node:
    __slots__ = ("pt", "idx", "rank")

    def __init__(self, pt, idx):
        self.pt = pt
        self.idx = idx  # positional id, stable within this run
        self.rank = -1  # canonical rank by exact coordinate order


class Triangulation:
    """Result: sub-triangles as point triples plus flagged edge point pairs."""

    __slots__ = ("triangles", "flagged_edges")

    def __init__(self, triangles, flagged_edges):
        self.triangles = triangles
        self.flagged_edges = flagged_edges


def triangulate_constrained(corners, segments, points, cache):
    """corners: three explicit points in parent order; segments: iterable of
    (pa, pb, line, flagged); points: iterable of isolated points; cache: the
    parent PlaneCache.  Returns a Triangulation."""
    segments = list(segments)
    points = list(points)
    if not segments and not points:
        return Triangulation([tuple(corners)], [])

    parent = tuple(c.approx() for c in corners)
    frame = choose_frame(cache, parent)

    fast = _try_single_chord(frame, corners, segments, points)
    if fast is not None:
        return fast
    return _general_case(frame, corners, segments, points)


# ---------------------------------------------------------------------------
# fast path: one constraint segment with both ends on the boundary


def _locate_on_boundary(frame, corners, p):
    """('corner', i) / ('side', i) for side (c[i], c[i+1]) / ('interior', -1)."""
    for i in range(3):
        if frame.same_2d(p, corners[i]):
            return ("corner", i)
    for i in range(3):
        if frame.orient(corners[i], corners[(i + 1) % 3], p) == 0:
            return ("side", i)
    return ("interior", -1)


def _try_single_chord(frame, corners, segments, points):
    if points or len(segments) != 1:
        return None
    pa, pb, _line, flagged = segments[0]
    if frame.same_2d(pa, pb):
        return None
    la = _locate_on_boundary(frame, corners, pa)
    lb = _locate_on_boundary(frame, corners, pb)
    if la[0] == "interior" or lb[0] == "interior":
        return None
    flags = [(pa, pb)] if flagged else []

    if la[0] == "corner" and lb[0] == "corner":
        # the chord coincides with one of the sides: nothing to split
        return Triangulation([tuple(corners)], flags)

    if la[0] == "corner":
        la, lb, pa, pb = lb, la, pb, pa  # make pa the side point

    if lb[0] == "corner":
        si = la[1]
        ci, cj = corners[si], corners[(si + 1) % 3]
        ck = corners[(si + 2) % 3]
        # whether the chord runs to the opposite corner or along the side,
        # the boundary point pa forces the same two-way split
        return Triangulation([(ci, pa, ck), (pa, cj, ck)], flags)

    si, sj = la[1], lb[1]
    if si == sj:
        # collinear with one side: order along it, fan from the far corner
        a, b = corners[si], corners[(si + 1) % 3]
        far = corners[(si + 2) % 3]
        if frame.cmp_u(a, b) != 0:
            d, s = frame.cmp_u(a, b), frame.cmp_u(pa, pb)
        else:
            d, s = frame.cmp_v(a, b), frame.cmp_v(pa, pb)
        first, second = (pa, pb) if s == d else (pb, pa)
        tris = [(a, first, far), (first, second, far), (second, b, far)]
        return Triangulation(tris, flags)

    # endpoints on two different sides, which always share a corner
    if (sj + 1) % 3 == si:
        si, sj, pa, pb = sj, si, pb, pa
    ci = corners[si]
    cj = corners[sj]  # shared corner
    ck = corners[(sj + 1) % 3]
    tris = [(pa, cj, pb), (ci, pa, pb), (ci, pb, ck)]
    return Triangulation(tris, flags)


# ---------------------------------------------------------------------------
# general path: refine the constraint graph, then peel the parent triangle


def _general_case(frame, corners, segments, points):
    all_pts = list(corners)
    for pa, pb, _line, _flagged in segments:
        all_pts.append(pa)
        all_pts.append(pb)
    all_pts.extend(points)

    nodes, pmap = _dedup_points(frame, all_pts)
    corner_ids = [pmap[id(c)] for c in corners]

    segs = []
    for pa, pb, line, flagged in segments:
        a, b = pmap[id(pa)], pmap[id(pb)]
        if a != b:
            segs.append([a, b, line, flagged])
    # the boundary sides join the graph like any other constraint; their
    # supporting lines use the parent's off-plane witness
    w = _witness_coords(frame)
    for i in range(3):
        ca, cb = frame.parent[i], frame.parent[(i + 1) % 3]
        line = ("edge",) + _canon_pair(ca, cb) + (w,)
        segs.append([corner_ids[i], corner_ids[(i + 1) % 3], line, False])

    segs = _refine_graph(frame, nodes, segs)
    _assign_ranks(frame, nodes)

    edge_flag = {}
    for a, b, _line, flagged in segs:
        if a == b:
            continue
        e = (a, b) if a < b else (b, a)
        edge_flag[e] = edge_flag.get(e, False) or flagged

    # directed boundary multiset of the whole parent: interior edges face
    # both ways, parent-side edges only inward (interior on the left)
    corner_pts = [nodes[c].pt for c in corner_ids]
    boundary = Counter()
    for a, b in edge_flag:
        side = _side_of(frame, corner_pts, nodes[a].pt, nodes[b].pt)
        if side is None:
            boundary[(a, b)] += 1
            boundary[(b, a)] += 1
        else:
            ci, cj = corner_pts[side], corner_pts[(side + 1) % 3]
            if frame.cmp_2d(nodes[a].pt, nodes[b].pt) == frame.cmp_2d(ci, cj):
                boundary[(a, b)] += 1
            else:
                boundary[(b, a)] += 1

    used = set()
    for a, b in boundary:
        used.add(a)
        used.add(b)
    isolated = [n.idx for n in nodes if n.idx not in used]

    tris = _peel_region(frame, nodes, boundary)
    if isolated:
        tris = _insert_isolated(frame, nodes, tris, isolated)

    # peeled triangles satisfy ccw() > 0, which is already parent winding
    out_tris = [(nodes[a].pt, nodes[b].pt, nodes[c].pt) for a, b, c in tris]
    flags = [
        (nodes[a].pt, nodes[b].pt) for (a, b), f in edge_flag.items() if f
    ]
    return Triangulation(out_tris, flags)


def _canon_pair(a, b):
    return (a, b) if a <= b else (b, a)


def _witness_coords(frame):
    """An explicit point exactly off the parent plane: offset the first
    corner along the dropped axis by a power of two at least as large as
    the coordinate, so the addition is exact and the off-plane orientation
    determinant reduces to the (nonzero) plane minor times that power."""
    a = list(frame.parent[0])
    mag = max(1.0, abs(a[frame.axis]))
    step = 2.0
    while step < mag:
        step *= 2.0
    a[frame.axis] += step
    return tuple(a)


def _dedup_points(frame, pts):
    """Exact dedup; returns (node list, map id(pt) -> node id)."""
    order = sorted(range(len(pts)), key=lambda i: pts[i].approx())
    nodes = []
    mapping = {}
    for i in order:
        p = pts[i]
        hit = None
        for k in range(len(nodes) - 1, -1, -1):
            q = nodes[k].pt
            if q.approx() != p.approx():
                break
            if frame.same_2d(p, q):
                hit = k
                break
        if hit is None:
            nodes.append(_Node(p, len(nodes)))
            mapping[id(p)] = len(nodes) - 1
        else:
            mapping[id(p)] = hit
    return nodes, mapping


def _assign_ranks(frame, nodes):
    """Canonical ranks by exact 2D coordinate order (crossing nodes are
    appended in discovery order, so positional ids are not canonical)."""
    order = sorted(range(len(nodes)), key=lambda i: nodes[i].pt.approx())
    i = 0
    while i < len(order):
        j = i + 1
        while (
            j < len(order)
            and nodes[order[j]].pt.approx() == nodes[order[i]].pt.approx()
        ):
            j += 1
        if j - i > 1:
            chunk = order[i:j]
            chunk.sort(
                key=cmp_to_key(
                    lambda x, y: frame.cmp_2d(nodes[x].pt, nodes[y].pt)
                )
            )
            order[i:j] = chunk
        i = j
    for r, node_id in enumerate(order):
        nodes[node_id].rank = r


def _refine_graph(frame, nodes, segs):
    """Split segments at contained nodes and at mutual proper crossings,
    constructing crossing points exactly; returns the refined segments."""

    def split_by_nodes(seg_list):
        out = []
        for a, b, line, flagged in seg_list:
            pa, pb = nodes[a].pt, nodes[b].pt
            interior = []
            for n in nodes:
                if n.idx in (a, b):
                    continue
                if frame.orient(pa, pb, n.pt) == 0 and frame.between_on_line(
                    n.pt, pa, pb
                ):
                    interior.append(n.idx)
            if not interior:
                out.append([a, b, line, flagged])
                continue
            axis = frame.u if frame.cmp_u(pa, pb) != 0 else frame.v
            chain = [a] + interior + [b]
            chain.sort(
                key=cmp_to_key(
                    lambda x, y: int(
                        kernel.compare_on_axis(nodes[x].pt, nodes[y].pt, axis)
                    )
                )
            )
            if chain[0] != a:
                chain.reverse()
            for i in range(len(chain) - 1):
                out.append([chain[i], chain[i + 1], line, flagged])
        return out

    # each round adds one crossing node, and n segments admit at most
    # n-choose-2 crossings
    cap = max(4096, len(segs) * len(segs))
    for _ in range(cap):
        segs = split_by_nodes(segs)
        hit = _find_crossing(frame, nodes, segs)
        if hit is None:
            return segs
        pt = _construct_crossing(frame, segs[hit[0]][2], segs[hit[1]][2])
        nodes.append(_Node(pt, len(nodes)))
    raise InvariantViolation("constraint refinement did not converge")


def _find_crossing(frame, nodes, segs):
    for i in range(len(segs)):
        a1, b1 = segs[i][0], segs[i][1]
        p1, q1 = nodes[a1].pt, nodes[b1].pt
        for j in range(i + 1, len(segs)):
            a2, b2 = segs[j][0], segs[j][1]
            if a2 in (a1, b1) or b2 in (a1, b1):
                continue
            p2, q2 = nodes[a2].pt, nodes[b2].pt
            o1 = frame.orient(p1, q1, p2)
            o2 = frame.orient(p1, q1, q2)
            if o1 * o2 >= 0:
                continue
            o3 = frame.orient(p2, q2, p1)
            o4 = frame.orient(p2, q2, q1)
            if o3 * o4 >= 0:
                continue
            return (i, j)
    return None


def _flat9(corners):
    return corners[0] + corners[1] + corners[2]


def _construct_crossing(frame, line1, line2):
    """Exact crossing point of two supporting lines within the parent plane."""
    if line1[0] == "edge" and line2[0] == "edge":
        l1, l2 = sorted((line1, line2))
        return ImplicitPointLPI(l1[1], l1[2], l2[1], l2[2], l2[3])
    if line1[0] == "edge":
        return ImplicitPointLPI(line1[1], line1[2], *line2[1:4])
    if line2[0] == "edge":
        return ImplicitPointLPI(line2[1], line2[2], *line1[1:4])
    t1 = tuple(sorted(line1[1:4]))
    t2 = tuple(sorted(line2[1:4]))
    if t2 < t1:
        t1, t2 = t2, t1
    return ImplicitPointTPI(_flat9(frame.parent), _flat9(t1), _flat9(t2))


def _side_of(frame, corners, pa, pb):
    """Index i when segment (pa, pb) lies on the parent side (i, i+1)."""
    for i in range(3):
        ci, cj = corners[i], corners[(i + 1) % 3]
        if frame.orient(ci, cj, pa) == 0 and frame.orient(ci, cj, pb) == 0:
            return i
    return None


def _peel_region(frame, nodes, boundary):
    """Triangulate the region enclosed by a directed-edge multiset (interior
    on the left of every edge) by peeling off empty triangles.

    The boundary needs no cycle structure, so holes, dangling chains and
    pinched contours require no special cases.  Each round takes the
    rank-minimal boundary edge (u, v) and the rank-minimal valid apex w, then
    replaces the region with (region - triangle): each triangle edge cancels
    from the boundary when present, else its reverse joins it.  A valid apex
    always exists because the region has some diagonal-only triangulation
    and the triangle bordering (u, v) in it passes every check below.
    """
    boundary = Counter(boundary)
    tris = []
    limit = 8 * len(nodes) + 64
    while boundary:
        u, v = min(
            boundary, key=lambda e: (nodes[e[0]].rank, nodes[e[1]].rank)
        )
        w = _find_apex(frame, nodes, boundary, u, v)
        if w is None:
            raise InvariantViolation("boundary edge admits no apex")
        tris.append((u, v, w))
        for a, b in ((u, v), (v, w), (w, u)):
            if boundary[(a, b)] > 0:
                boundary[(a, b)] -= 1
                if not boundary[(a, b)]:
                    del boundary[(a, b)]
            else:
                boundary[(b, a)] += 1
        if len(tris) > limit:
            raise InvariantViolation("region peeling did not converge")
    return tris


def _find_apex(frame, nodes, boundary, u, v):
    """Rank-minimal node w such that triangle (u, v, w) is CCW, contains no
    boundary node in its closure, and crosses no boundary edge."""
    pu, pv = nodes[u].pt, nodes[v].pt
    cands = set()
    for a, b in boundary:
        cands.add(a)
        cands.add(b)

    for w in sorted(cands, key=lambda i: nodes[i].rank):
        if w == u or w == v:
            continue
        pw = nodes[w].pt
        if frame.ccw(pu, pv, pw) <= 0:
            continue
        corners = (u, v, w)
        ok = True
        for x in cands:
            if x in corners:
                continue
            px = nodes[x].pt
            if (
                frame.ccw(pu, pv, px) >= 0
                and frame.ccw(pv, pw, px) >= 0
                and frame.ccw(pw, pu, px) >= 0
            ):
                ok = False
                break
        if not ok:
            continue
        sides = ((u, pu, v, pv), (v, pv, w, pw), (w, pw, u, pu))
        for a, b in boundary:
            pa, pb = nodes[a].pt, nodes[b].pt
            for s1, p1, s2, p2 in sides:
                if a in (s1, s2) or b in (s1, s2):
                    continue
                o1 = frame.orient(p1, p2, pa)
                o2 = frame.orient(p1, p2, pb)
                if o1 * o2 >= 0:
                    continue
                o3 = frame.orient(pa, pb, p1)
                o4 = frame.orient(pa, pb, p2)
                if o3 * o4 < 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return w
    return None


def _insert_isolated(frame, nodes, tris, isolated):
    """Split triangles to absorb degree-0 constraint points, canonically."""
    tris = list(tris)
    for node_id in sorted(isolated, key=lambda i: nodes[i].rank):
        p = nodes[node_id].pt
        placed = False
        for ti in range(len(tris)):
            a, b, c = tris[ti]
            pa, pb, pc = nodes[a].pt, nodes[b].pt, nodes[c].pt
            o1 = frame.ccw(pa, pb, p)
            if o1 < 0:
                continue
            o2 = frame.ccw(pb, pc, p)
            if o2 < 0:
                continue
            o3 = frame.ccw(pc, pa, p)
            if o3 < 0:
                continue
            zeros = (o1 == 0) + (o2 == 0) + (o3 == 0)
            if zeros == 0:
                tris[ti] = (a, b, node_id)
                tris.append((b, c, node_id))
                tris.append((c, a, node_id))
                placed = True
                break
            if zeros == 1:
                # on one edge: split this triangle and the one across it
                if o1 == 0:
                    e, far = (a, b), c
                elif o2 == 0:
                    e, far = (b, c), a
                else:
                    e, far = (c, a), b
                tris[ti] = (e[0], node_id, far)
                tris.append((node_id, e[1], far))
                for tj in range(len(tris) - 1):
                    if tj == ti:
                        continue
                    t2 = tris[tj]
                    if e[0] in t2 and e[1] in t2:
                        other = [x for x in t2 if x not in e][0]
                        tris[tj] = (e[1], node_id, other)
                        tris.append((node_id, e[0], other))
                        break
                placed = True
                break
            # zeros >= 2 would mean the point equals a corner, which the
            # dedup has already ruled out
        if not placed:
            raise InvariantViolation("isolated point not inside the parent")
    return tris
