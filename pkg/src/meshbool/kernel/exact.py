"""Exact rational stage of the predicate cascade.

Everything here operates on arbitrary-precision rationals built from the
double-precision inputs, so results are exact for all inputs.  These
functions are only reached when the float filter and the interval stage
both fail to certify a sign, which keeps their cost off the common path.
"""

from __future__ import annotations

from ..exactnum import rational as Q
from ..exactnum import sign_of


def homo_explicit(x, y, z):
    return (Q(x), Q(y), Q(z), Q(1))


def homo_lpi(px, py, pz, qx, qy, qz, rx, ry, rz, sx, sy, sz, tx, ty, tz):
    """Exact homogeneous coordinates of line(p,q) ^ plane(r,s,t)."""
    p = (Q(px), Q(py), Q(pz))
    q = (Q(qx), Q(qy), Q(qz))
    r = (Q(rx), Q(ry), Q(rz))
    s = (Q(sx), Q(sy), Q(sz))
    t = (Q(tx), Q(ty), Q(tz))
    a = (s[0] - r[0], s[1] - r[1], s[2] - r[2])
    b = (t[0] - r[0], t[1] - r[1], t[2] - r[2])
    n = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    d = (q[0] - p[0], q[1] - p[1], q[2] - p[2])
    w = n[0] * d[0] + n[1] * d[1] + n[2] * d[2]
    num = n[0] * (r[0] - p[0]) + n[1] * (r[1] - p[1]) + n[2] * (r[2] - p[2])
    return (
        p[0] * w + num * d[0],
        p[1] * w + num * d[1],
        p[2] * w + num * d[2],
        w,
    )


def _plane_eq(px, py, pz, qx, qy, qz, rx, ry, rz):
    p = (Q(px), Q(py), Q(pz))
    a = (Q(qx) - p[0], Q(qy) - p[1], Q(qz) - p[2])
    b = (Q(rx) - p[0], Q(ry) - p[1], Q(rz) - p[2])
    n = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    d = n[0] * p[0] + n[1] * p[1] + n[2] * p[2]
    return n, d


def _det3(r1, r2, r3):
    return (
        r1[0] * (r2[1] * r3[2] - r2[2] * r3[1])
        - r1[1] * (r2[0] * r3[2] - r2[2] * r3[0])
        + r1[2] * (r2[0] * r3[1] - r2[1] * r3[0])
    )


def homo_tpi(t1, t2, t3):
    """Exact homogeneous coordinates of the common point of three triangle
    planes; each argument is a flat 9-tuple of the triangle's corners."""
    n1, d1 = _plane_eq(*t1)
    n2, d2 = _plane_eq(*t2)
    n3, d3 = _plane_eq(*t3)
    w = _det3(n1, n2, n3)
    x = _det3((d1, n1[1], n1[2]), (d2, n2[1], n2[2]), (d3, n3[1], n3[2]))
    y = _det3((n1[0], d1, n1[2]), (n2[0], d2, n2[2]), (n3[0], d3, n3[2]))
    z = _det3((n1[0], n1[1], d1), (n2[0], n2[1], d2), (n3[0], n3[1], d3))
    return (x, y, z, w)


def det3h_sign(h1, h2, h3):
    return sign_of(_det3(h1, h2, h3))


def det4h_sign(h1, h2, h3, h4):
    d1 = _det3(h1[:3], h2[:3], h3[:3])
    d2 = _det3(h1[:3], h2[:3], h4[:3])
    d3 = _det3(h1[:3], h3[:3], h4[:3])
    d4 = _det3(h2[:3], h3[:3], h4[:3])
    # expansion along the W column (column index 3)
    det = -h1[3] * d4 + h2[3] * d3 - h3[3] * d2 + h4[3] * d1
    return sign_of(det)


def plane_minors_exact(ax, ay, az, bx, by, bz, cx, cy, cz):
    a = (Q(ax), Q(ay), Q(az))
    b = (Q(bx), Q(by), Q(bz))
    c = (Q(cx), Q(cy), Q(cz))
    myz = (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1])
    mxz = (b[0] - a[0]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[0] - a[0])
    mxy = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    mxyz = _det3(a, b, c)
    return myz, mxz, mxy, mxyz


def orient3d_cached_sign(hp, minors):
    """Sign of the plane/point incidence determinant for a homogeneous
    point against exact plane minors; caller corrects by sign(W)."""
    myz, mxz, mxy, mxyz = minors
    x, y, z, w = hp
    return sign_of(-x * myz + y * mxz - z * mxy + w * mxyz)
