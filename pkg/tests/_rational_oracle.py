"""Independent exact-rational reference for the geometric tests.

Everything here is computed with fractions.Fraction from first principles —
no code under test is imported — so agreement between the package and this
module is meaningful.
"""

from fractions import Fraction


def fr(p):
    return tuple(Fraction(c) for c in p)


fr3 = fr


def orient2d(a, b, c):
    a, b, c = fr(a), fr(b), fr(c)
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def nearest_double(q):
    """Round a Fraction to the nearest double (int/int true division is
    correctly rounded in CPython)."""
    if q == 0:
        return 0.0
    return q.numerator / q.denominator


def sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def orient3d(a, b, c, d):
    """Sign of det of rows (a-d, b-d, c-d): positive when d sees abc
    counterclockwise."""
    a, b, c, d = fr(a), fr(b), fr(c), fr(d)
    v = dot(cross(sub(a, d), sub(b, d)), sub(c, d))
    return (v > 0) - (v < 0)


def plane_of(a, b, c):
    """(normal, offset) with n . x == d on the plane through a, b, c."""
    n = cross(sub(b, a), sub(c, a))
    return n, dot(n, a)


def line_plane_point(p, q, r, s, t):
    """Exact intersection of line(p, q) with plane(r, s, t), or None when
    the line is parallel to the plane (or the plane degenerate)."""
    p, q = fr3(p), fr3(q)
    n, d = plane_of(fr3(r), fr3(s), fr3(t))
    dirv = sub(q, p)
    den = dot(n, dirv)
    if den == 0:
        return None
    u = Fraction(d - dot(n, p), 1) / den
    return (p[0] + u * dirv[0], p[1] + u * dirv[1], p[2] + u * dirv[2])


def three_planes_point(t1, t2, t3):
    """Common point of three triangle planes, each given as a flat 9-tuple
    or a triple of corner triples."""
    rows = []
    rhs = []
    for t in (t1, t2, t3):
        if len(t) == 9:
            a, b, c = fr3(t[0:3]), fr3(t[3:6]), fr3(t[6:9])
        else:
            a, b, c = fr3(t[0]), fr3(t[1]), fr3(t[2])
        n, d = plane_of(a, b, c)
        rows.append(n)
        rhs.append(d)

    def det3(m):
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )

    den = det3(rows)
    if den == 0:
        return None
    out = []
    for k in range(3):
        m = [list(r) for r in rows]
        for i in range(3):
            m[i][k] = rhs[i]
        out.append(det3(m) / den)
    return tuple(out)


def rational_coords(point):
    """Exact coordinates of any kernel point, recomputed independently from
    the point's defining float data."""
    kind = getattr(point, "kind", 0)
    if kind == 1:
        return line_plane_point(point.p, point.q, point.r, point.s, point.t)
    if kind == 2:
        return three_planes_point(point.t1, point.t2, point.t3)
    if kind == 3:
        return tuple(
            Fraction(int(c.numerator), int(c.denominator))
            for c in point.coords
        )
    return fr3(point.approx())


def tri_cross_sum(coord_triples):
    """Sum of (b-a) x (c-a) over triangles: twice the vector area.  Over any
    consistently wound tiling this telescopes to the boundary, so it equals
    the parent triangle's own cross product exactly."""
    s = [Fraction(0)] * 3
    for a, b, c in coord_triples:
        v = cross(sub(b, a), sub(c, a))
        s[0] += v[0]
        s[1] += v[1]
        s[2] += v[2]
    return tuple(s)


def collinear(a, b, p):
    return cross(sub(b, a), sub(p, a)) == (0, 0, 0)


def strictly_inside_segment(a, b, p):
    """p strictly between a and b on the segment (assumes collinear)."""
    if not collinear(a, b, p):
        return False
    for k in range(3):
        if a[k] != b[k]:
            lo, hi = (a[k], b[k]) if a[k] < b[k] else (b[k], a[k])
            return lo < p[k] < hi
    return False


def point_in_triangle(p, a, b, c):
    """'in' / 'on' / 'out' for coplanar p against triangle abc (exact)."""
    n = cross(sub(b, a), sub(c, a))
    assert dot(n, sub(p, a)) == 0, "point not on the triangle plane"
    signs = []
    for u, v in ((a, b), (b, c), (c, a)):
        s = dot(n, cross(sub(v, u), sub(p, u)))
        signs.append((s > 0) - (s < 0))
    if any(s < 0 for s in signs) and any(s > 0 for s in signs):
        return "out"
    if 0 in signs:
        return "on"
    return "in"


def point_in_closed_mesh(p, triangles, direction=(1, Fraction(10007, 10009), Fraction(9973, 10037))):
    """Crossing parity of a ray from p against a closed triangle set, all in
    Fractions.  Raises ValueError on any degenerate incidence (ray through
    an edge, vertex, or in-plane triangle) so callers pick another ray."""
    p = fr3(p)
    d = tuple(Fraction(c) for c in direction)
    crossings = 0
    for tri in triangles:
        a, b, c = (fr3(q) for q in tri)
        n = cross(sub(b, a), sub(c, a))
        dn = dot(n, d)
        f = dot(n, sub(p, a))
        if dn == 0:
            if f == 0 and point_in_triangle(p, a, b, c) != "out":
                raise ValueError("ray origin in a parallel triangle")
            continue
        t = -Fraction(f) / dn
        if t == 0:
            if point_in_triangle(p, a, b, c) != "out":
                raise ValueError("ray origin on the mesh")
            continue
        if t < 0:
            continue
        x = tuple(p[k] + t * d[k] for k in range(3))
        loc = point_in_triangle(x, a, b, c)
        if loc == "on":
            raise ValueError("ray grazes an edge or vertex")
        if loc == "in":
            crossings += 1
    return crossings % 2 == 1


def segment_intersection_1d(a1, b1, a2, b2):
    """Overlap [max(lo), min(hi)] of two rational intervals, or None."""
    lo1, hi1 = (a1, b1) if a1 <= b1 else (b1, a1)
    lo2, hi2 = (a2, b2) if a2 <= b2 else (b2, a2)
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if lo > hi:
        return None
    return lo, hi


def triangle_pair_segment(t1, t2):
    """Exact intersection segment of two non-coplanar triangles, or None /
    a single point.  Used to cross-check detected intersections."""
    n2, d2 = plane_of(*map(fr3, t2))
    s1 = [dot(n2, fr3(p)) - d2 for p in t1]
    n1, d1 = plane_of(*map(fr3, t1))
    s2 = [dot(n1, fr3(p)) - d1 for p in t2]
    if all(s > 0 for s in s1) or all(s < 0 for s in s1):
        return None
    if all(s > 0 for s in s2) or all(s < 0 for s in s2):
        return None
    if all(s == 0 for s in s1):
        return "coplanar"

    def span(tri, signs, n_other, d_other):
        pts = []
        tri = [fr3(p) for p in tri]
        for i in range(3):
            if signs[i] == 0:
                pts.append(tri[i])
        for i in range(3):
            j = (i + 1) % 3
            if signs[i] * signs[j] < 0:
                p, q = tri[i], tri[j]
                dirv = sub(q, p)
                u = (d_other - dot(n_other, p)) / dot(n_other, dirv)
                pts.append(
                    (p[0] + u * dirv[0], p[1] + u * dirv[1], p[2] + u * dirv[2])
                )
        return pts

    pts1 = span(t1, s1, n2, d2)
    pts2 = span(t2, s2, n1, d1)
    if not pts1 or not pts2:
        return None
    axis = max(range(3), key=lambda k: abs(cross(n1, n2)[k]))
    lo1 = min(p[axis] for p in pts1), max(p[axis] for p in pts1)
    lo2 = min(p[axis] for p in pts2), max(p[axis] for p in pts2)
    ov = segment_intersection_1d(lo1[0], lo1[1], lo2[0], lo2[1])
    if ov is None:
        return None

    def at(pts, val):
        for p in pts:
            if p[axis] == val:
                return p
        a, b = pts[0], pts[1]
        u = (val - a[axis]) / (b[axis] - a[axis])
        return tuple(a[k] + u * (b[k] - a[k]) for k in range(3))

    pa, pb = at(pts1, ov[0]), at(pts1, ov[1])
    if pa == pb:
        return ("point", pa)
    return ("segment", pa, pb)
