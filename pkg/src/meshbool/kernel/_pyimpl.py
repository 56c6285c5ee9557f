"""Pure-python backend for the predicate kernel.

Provides the two cheap stages of the sign cascade: semi-static floating
point filters for explicit coordinates, and outward-rounded interval
arithmetic for implicit (homogeneous) coordinates.  Every function returns
a certified sign in {-1, 0, +1} or UNCERTAIN when the stage cannot decide;
the exact rational stage lives elsewhere and is never consulted from here.

The compiled backend in ``meshbool._native`` exposes the same surface.
"""

from __future__ import annotations

import math

UNCERTAIN = 2

_INF = math.inf
_U = 2.0**-53  # unit roundoff for binary64
# Static filter constants for 2x2 / 3x3 difference determinants.
CCW_ERR_A = (3.0 + 16.0 * _U) * _U
O3D_ERR_A = (7.0 + 56.0 * _U) * _U

# ---------------------------------------------------------------------------
# stage 1: floating point filters on explicit coordinates


def orient2d_filter(ax, ay, bx, by, cx, cy):
    l = (ax - cx) * (by - cy)
    r = (ay - cy) * (bx - cx)
    det = l - r
    detsum = abs(l) + abs(r)
    err = CCW_ERR_A * detsum
    if det > err:
        return 1
    if -det > err:
        return -1
    if detsum == 0.0:
        return 0  # every product was exact zero, so det is exact
    return UNCERTAIN


def orient3d_filter(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    adx = ax - px
    ady = ay - py
    adz = az - pz
    bdx = bx - px
    bdy = by - py
    bdz = bz - pz
    cdx = cx - px
    cdy = cy - py
    cdz = cz - pz

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady

    det = (
        adz * (bdxcdy - cdxbdy)
        + bdz * (cdxady - adxcdy)
        + cdz * (adxbdy - bdxady)
    )
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
        + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
        + (abs(adxbdy) + abs(bdxady)) * abs(cdz)
    )
    err = O3D_ERR_A * permanent
    if det > err:
        return 1
    if -det > err:
        return -1
    if permanent == 0.0:
        return 0
    return UNCERTAIN


def plane_minors(ax, ay, az, bx, by, bz, cx, cy, cz):
    """Float values and error multipliers for the four cofactors of the
    plane through a, b, c.

    Returns (myz, mxz, mxy, mxyz, kyz, kxz, kxy, kxyz); each true minor
    lies within k * u of its float value (u = unit roundoff).
    """
    t1 = by - ay
    t2 = cz - az
    t3 = bz - az
    t4 = cy - ay
    myz = t1 * t2 - t3 * t4
    kyz = 3.000000000000004 * (abs(t1 * t2) + abs(t3 * t4))

    s1 = bx - ax
    s2 = cx - ax
    mxz = s1 * t2 - t3 * s2
    kxz = 3.000000000000004 * (abs(s1 * t2) + abs(t3 * s2))

    mxy = s1 * t4 - t1 * s2
    kxy = 3.000000000000004 * (abs(s1 * t4) + abs(t1 * s2))

    p1 = by * cz
    p2 = bz * cy
    p3 = bx * cz
    p4 = bz * cx
    p5 = bx * cy
    p6 = by * cx
    mxyz = ax * (p1 - p2) - ay * (p3 - p4) + az * (p5 - p6)
    kxyz = 8.0 * (
        abs(ax) * (abs(p1) + abs(p2))
        + abs(ay) * (abs(p3) + abs(p4))
        + abs(az) * (abs(p5) + abs(p6))
    )
    return myz, mxz, mxy, mxyz, kyz, kxz, kxy, kxyz


def orient3d_cached_filter(px, py, pz, myz, mxz, mxy, mxyz, kyz, kxz, kxy, kxyz):
    t1 = px * myz
    t2 = py * mxz
    t3 = pz * mxy
    det = -t1 + t2 - t3 + mxyz
    err = _U * (
        abs(px) * kyz
        + abs(py) * kxz
        + abs(pz) * kxy
        + kxyz
        + 4.0 * (abs(t1) + abs(t2) + abs(t3) + abs(mxyz))
    )
    if det > err:
        return 1
    if -det > err:
        return -1
    if err == 0.0:
        return 0
    return UNCERTAIN


# ---------------------------------------------------------------------------
# stage 2: interval arithmetic with outward rounding
#
# Intervals are (lo, hi) float pairs guaranteed to contain the exact value;
# every operation widens its float result by one ulp in each direction,
# which dominates the half-ulp rounding error of the operation itself.


def _ia_add(alo, ahi, blo, bhi):
    return math.nextafter(alo + blo, -_INF), math.nextafter(ahi + bhi, _INF)


def _ia_sub(alo, ahi, blo, bhi):
    return math.nextafter(alo - bhi, -_INF), math.nextafter(ahi - blo, _INF)


def _ia_mul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = min(p1, p2, p3, p4)
    hi = max(p1, p2, p3, p4)
    if lo != lo or hi != hi:  # inf * 0 after overflow
        return -_INF, _INF
    return math.nextafter(lo, -_INF), math.nextafter(hi, _INF)


def interval_sign(lo, hi):
    if lo > 0.0:
        return 1
    if hi < 0.0:
        return -1
    return UNCERTAIN


def _det2_i(a, b, c, d):
    # a*d - b*c on intervals
    return _ia_sub(*_ia_mul(*a, *d), *_ia_mul(*b, *c))


def _det3_i(x1, y1, z1, x2, y2, z2, x3, y3, z3):
    m1 = _det2_i(y2, z2, y3, z3)
    m2 = _det2_i(x2, z2, x3, z3)
    m3 = _det2_i(x2, y2, x3, y3)
    t = _ia_sub(*_ia_mul(*x1, *m1), *_ia_mul(*y1, *m2))
    return _ia_add(*t, *_ia_mul(*z1, *m3))


def _unpack_h(h):
    # 8 floats -> four (lo, hi) pairs
    return (h[0], h[1]), (h[2], h[3]), (h[4], h[5]), (h[6], h[7])


def det3h_sign_interval(h1, h2, h3):
    """Sign of det[[u1,v1,w1],[u2,v2,w2],[u3,v3,w3]] where each row is an
    interval triple packed as 6 floats (ulo,uhi,vlo,vhi,wlo,whi)."""
    d = _det3_i(
        (h1[0], h1[1]), (h1[2], h1[3]), (h1[4], h1[5]),
        (h2[0], h2[1]), (h2[2], h2[3]), (h2[4], h2[5]),
        (h3[0], h3[1]), (h3[2], h3[3]), (h3[4], h3[5]),
    )
    return interval_sign(*d)


def det4h_sign_interval(h1, h2, h3, h4):
    """Sign of the 4x4 determinant whose rows are homogeneous interval
    points packed as 8 floats each (X, Y, Z, W as lo/hi pairs)."""
    x1, y1, z1, w1 = _unpack_h(h1)
    x2, y2, z2, w2 = _unpack_h(h2)
    x3, y3, z3, w3 = _unpack_h(h3)
    x4, y4, z4, w4 = _unpack_h(h4)
    # Laplace expansion along the W column.
    d1 = _det3_i(x2, y2, z2, x3, y3, z3, x4, y4, z4)
    d2 = _det3_i(x1, y1, z1, x3, y3, z3, x4, y4, z4)
    d3 = _det3_i(x1, y1, z1, x2, y2, z2, x4, y4, z4)
    d4 = _det3_i(x1, y1, z1, x2, y2, z2, x3, y3, z3)
    t1 = _ia_sub(*_ia_mul(*w2, *d2), *_ia_mul(*w1, *d1))
    t2 = _ia_sub(*_ia_mul(*w4, *d4), *_ia_mul(*w3, *d3))
    return interval_sign(*_ia_add(*t1, *t2))


def cmp_h_interval(x1lo, x1hi, w1lo, w1hi, x2lo, x2hi, w2lo, w2hi):
    """Sign of X1*W2 - X2*W1 (coordinate comparison before W-sign fixup)."""
    d = _ia_sub(
        *_ia_mul(x1lo, x1hi, w2lo, w2hi), *_ia_mul(x2lo, x2hi, w1lo, w1hi)
    )
    return interval_sign(*d)


def _minor_interval(m, k):
    r = k * _U
    return math.nextafter(m - r, -_INF), math.nextafter(m + r, _INF)


def orient3d_cached_h_interval(
    hx, myz, mxz, mxy, mxyz, kyz, kxz, kxy, kxyz
):
    """Sign of -X*myz + Y*mxz - Z*mxy + W*mxyz with the minors taken as
    intervals m +/- k*u; caller corrects the result by sign(W)."""
    x, y, z, w = _unpack_h(hx)
    iyz = _minor_interval(myz, kyz)
    ixz = _minor_interval(mxz, kxz)
    ixy = _minor_interval(mxy, kxy)
    ixyz = _minor_interval(mxyz, kxyz)
    t1 = _ia_sub(*_ia_mul(*y, *ixz), *_ia_mul(*x, *iyz))
    t2 = _ia_sub(*_ia_mul(*w, *ixyz), *_ia_mul(*z, *ixy))
    return interval_sign(*_ia_add(*t1, *t2))


def orient2d_interval(ax, ay, bx, by, cx, cy):
    """Interval re-evaluation of orient2d for exact double inputs; the
    dynamic bound is often tighter than the static filter's."""
    acx = _ia_sub(ax, ax, cx, cx)
    bcx = _ia_sub(bx, bx, cx, cx)
    acy = _ia_sub(ay, ay, cy, cy)
    bcy = _ia_sub(by, by, cy, cy)
    d = _ia_sub(*_ia_mul(*acx, *bcy), *_ia_mul(*acy, *bcx))
    return interval_sign(*d)


def orient3d_interval(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    d = _det3_i(
        _ia_sub(ax, ax, px, px),
        _ia_sub(ay, ay, py, py),
        _ia_sub(az, az, pz, pz),
        _ia_sub(bx, bx, px, px),
        _ia_sub(by, by, py, py),
        _ia_sub(bz, bz, pz, pz),
        _ia_sub(cx, cx, px, px),
        _ia_sub(cy, cy, py, py),
        _ia_sub(cz, cz, pz, pz),
    )
    return interval_sign(*d)


# ---------------------------------------------------------------------------
# interval homogeneous coordinates of implicit points


def _exact(v):
    return (v, v)


def lpi_interval(px, py, pz, qx, qy, qz, rx, ry, rz, sx, sy, sz, tx, ty, tz):
    """Homogeneous interval coordinates of line(p,q) ^ plane(r,s,t),
    packed as 8 floats.  W straddling zero means the construction could
    not be certified here and the exact stage must be consulted."""
    p = (_exact(px), _exact(py), _exact(pz))
    q = (_exact(qx), _exact(qy), _exact(qz))
    r = (_exact(rx), _exact(ry), _exact(rz))

    ax = _ia_sub(sx, sx, rx, rx)
    ay = _ia_sub(sy, sy, ry, ry)
    az = _ia_sub(sz, sz, rz, rz)
    bx = _ia_sub(tx, tx, rx, rx)
    by = _ia_sub(ty, ty, ry, ry)
    bz = _ia_sub(tz, tz, rz, rz)
    nx = _ia_sub(*_ia_mul(*ay, *bz), *_ia_mul(*az, *by))
    ny = _ia_sub(*_ia_mul(*az, *bx), *_ia_mul(*ax, *bz))
    nz = _ia_sub(*_ia_mul(*ax, *by), *_ia_mul(*ay, *bx))

    dx = _ia_sub(*q[0], *p[0])
    dy = _ia_sub(*q[1], *p[1])
    dz = _ia_sub(*q[2], *p[2])
    w = _ia_add(
        *_ia_add(*_ia_mul(*nx, *dx), *_ia_mul(*ny, *dy)), *_ia_mul(*nz, *dz)
    )

    ex = _ia_sub(*r[0], *p[0])
    ey = _ia_sub(*r[1], *p[1])
    ez = _ia_sub(*r[2], *p[2])
    num = _ia_add(
        *_ia_add(*_ia_mul(*nx, *ex), *_ia_mul(*ny, *ey)), *_ia_mul(*nz, *ez)
    )

    X = _ia_add(*_ia_mul(*p[0], *w), *_ia_mul(*num, *dx))
    Y = _ia_add(*_ia_mul(*p[1], *w), *_ia_mul(*num, *dy))
    Z = _ia_add(*_ia_mul(*p[2], *w), *_ia_mul(*num, *dz))
    return (*X, *Y, *Z, *w)


def tpi_interval(
    p1x, p1y, p1z, q1x, q1y, q1z, r1x, r1y, r1z,
    p2x, p2y, p2z, q2x, q2y, q2z, r2x, r2y, r2z,
    p3x, p3y, p3z, q3x, q3y, q3z, r3x, r3y, r3z,
):
    """Homogeneous interval coordinates of the common point of three
    triangle planes, packed as 8 floats."""

    def normal_offset(px, py, pz, qx, qy, qz, rx, ry, rz):
        ax = _ia_sub(qx, qx, px, px)
        ay = _ia_sub(qy, qy, py, py)
        az = _ia_sub(qz, qz, pz, pz)
        bx = _ia_sub(rx, rx, px, px)
        by = _ia_sub(ry, ry, py, py)
        bz = _ia_sub(rz, rz, pz, pz)
        nx = _ia_sub(*_ia_mul(*ay, *bz), *_ia_mul(*az, *by))
        ny = _ia_sub(*_ia_mul(*az, *bx), *_ia_mul(*ax, *bz))
        nz = _ia_sub(*_ia_mul(*ax, *by), *_ia_mul(*ay, *bx))
        d = _ia_add(
            *_ia_add(*_ia_mul(*nx, px, px), *_ia_mul(*ny, py, py)),
            *_ia_mul(*nz, pz, pz),
        )
        return nx, ny, nz, d

    n1x, n1y, n1z, d1 = normal_offset(p1x, p1y, p1z, q1x, q1y, q1z, r1x, r1y, r1z)
    n2x, n2y, n2z, d2 = normal_offset(p2x, p2y, p2z, q2x, q2y, q2z, r2x, r2y, r2z)
    n3x, n3y, n3z, d3 = normal_offset(p3x, p3y, p3z, q3x, q3y, q3z, r3x, r3y, r3z)

    w = _det3_i(n1x, n1y, n1z, n2x, n2y, n2z, n3x, n3y, n3z)
    X = _det3_i(d1, n1y, n1z, d2, n2y, n2z, d3, n3y, n3z)
    Y = _det3_i(n1x, d1, n1z, n2x, d2, n2z, n3x, d3, n3z)
    Z = _det3_i(n1x, n1y, d1, n2x, n2y, d2, n3x, n3y, d3)
    return (*X, *Y, *Z, *w)


# ---------------------------------------------------------------------------
# explicit composites used by hot loops


def point_in_tri_2d_filter(px, py, ax, ay, bx, by, cx, cy):
    """0 inside, 1 on boundary, 2 outside, 3 uncertain; winding-agnostic."""
    s1 = orient2d_filter(ax, ay, bx, by, px, py)
    if s1 == UNCERTAIN:
        return 3
    s2 = orient2d_filter(bx, by, cx, cy, px, py)
    if s2 == UNCERTAIN:
        return 3
    if s1 * s2 < 0:
        return 2
    s3 = orient2d_filter(cx, cy, ax, ay, px, py)
    if s3 == UNCERTAIN:
        return 3
    if s1 * s3 < 0 or s2 * s3 < 0:
        return 2
    if s1 == 0 or s2 == 0 or s3 == 0:
        return 1
    return 0
