# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled backend: floating point filters, outward-rounded interval
arithmetic, and the octree hot loops.  Mirrors meshbool.kernel._pyimpl
function for function; the tests run both backends against the same
rational oracle."""

from libc.math cimport fabs, nextafter, INFINITY
from libcpp.vector cimport vector
from libcpp.unordered_set cimport unordered_set
from libcpp.algorithm cimport sort as cpp_sort

import numpy as np
cimport numpy as cnp

cnp.import_array()

UNCERTAIN = 2

cdef double _U = 2.0 ** -53
cdef double CCW_A = (3.0 + 16.0 * _U) * _U
cdef double O3D_A = (7.0 + 56.0 * _U) * _U
cdef double MINOR_K = 3.000000000000004


# ---------------------------------------------------------------------------
# stage 1 filters

def orient2d_filter(double ax, double ay, double bx, double by,
                    double cx, double cy):
    return _o2d_filter(ax, ay, bx, by, cx, cy)


cdef inline int _o2d_filter(double ax, double ay, double bx, double by,
                            double cx, double cy) noexcept:
    cdef double l = (ax - cx) * (by - cy)
    cdef double r = (ay - cy) * (bx - cx)
    cdef double det = l - r
    cdef double detsum = fabs(l) + fabs(r)
    cdef double err = CCW_A * detsum
    if det > err:
        return 1
    if -det > err:
        return -1
    if detsum == 0.0:
        return 0
    return 2


def orient3d_filter(double ax, double ay, double az, double bx, double by,
                    double bz, double cx, double cy, double cz,
                    double px, double py, double pz):
    return _o3d_filter(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz)


cdef inline int _o3d_filter(double ax, double ay, double az, double bx,
                            double by, double bz, double cx, double cy,
                            double cz, double px, double py, double pz) noexcept:
    cdef double adx = ax - px, ady = ay - py, adz = az - pz
    cdef double bdx = bx - px, bdy = by - py, bdz = bz - pz
    cdef double cdx = cx - px, cdy = cy - py, cdz = cz - pz
    cdef double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy
    cdef double cdxady = cdx * ady, adxcdy = adx * cdy
    cdef double adxbdy = adx * bdy, bdxady = bdx * ady
    cdef double det = (adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy)
                       + cdz * (adxbdy - bdxady))
    cdef double permanent = ((fabs(bdxcdy) + fabs(cdxbdy)) * fabs(adz)
                             + (fabs(cdxady) + fabs(adxcdy)) * fabs(bdz)
                             + (fabs(adxbdy) + fabs(bdxady)) * fabs(cdz))
    cdef double err = O3D_A * permanent
    if det > err:
        return 1
    if -det > err:
        return -1
    if permanent == 0.0:
        return 0
    return 2


def plane_minors(double ax, double ay, double az, double bx, double by,
                 double bz, double cx, double cy, double cz):
    cdef double t1 = by - ay, t2 = cz - az, t3 = bz - az, t4 = cy - ay
    cdef double s1 = bx - ax, s2 = cx - ax
    cdef double myz = t1 * t2 - t3 * t4
    cdef double kyz = MINOR_K * (fabs(t1 * t2) + fabs(t3 * t4))
    cdef double mxz = s1 * t2 - t3 * s2
    cdef double kxz = MINOR_K * (fabs(s1 * t2) + fabs(t3 * s2))
    cdef double mxy = s1 * t4 - t1 * s2
    cdef double kxy = MINOR_K * (fabs(s1 * t4) + fabs(t1 * s2))
    cdef double p1 = by * cz, p2 = bz * cy, p3 = bx * cz
    cdef double p4 = bz * cx, p5 = bx * cy, p6 = by * cx
    cdef double mxyz = ax * (p1 - p2) - ay * (p3 - p4) + az * (p5 - p6)
    cdef double kxyz = 8.0 * (fabs(ax) * (fabs(p1) + fabs(p2))
                              + fabs(ay) * (fabs(p3) + fabs(p4))
                              + fabs(az) * (fabs(p5) + fabs(p6)))
    return (myz, mxz, mxy, mxyz, kyz, kxz, kxy, kxyz)


def orient3d_cached_filter(double px, double py, double pz, double myz,
                           double mxz, double mxy, double mxyz, double kyz,
                           double kxz, double kxy, double kxyz):
    cdef double t1 = px * myz, t2 = py * mxz, t3 = pz * mxy
    cdef double det = -t1 + t2 - t3 + mxyz
    cdef double err = _U * (fabs(px) * kyz + fabs(py) * kxz + fabs(pz) * kxy
                            + kxyz
                            + 4.0 * (fabs(t1) + fabs(t2) + fabs(t3) + fabs(mxyz)))
    if det > err:
        return 1
    if -det > err:
        return -1
    if err == 0.0:
        return 0
    return 2


# ---------------------------------------------------------------------------
# interval arithmetic (outward rounded by one ulp per operation)

cdef inline void ia_add(double alo, double ahi, double blo, double bhi,
                        double* rlo, double* rhi) noexcept:
    rlo[0] = nextafter(alo + blo, -INFINITY)
    rhi[0] = nextafter(ahi + bhi, INFINITY)


cdef inline void ia_sub(double alo, double ahi, double blo, double bhi,
                        double* rlo, double* rhi) noexcept:
    rlo[0] = nextafter(alo - bhi, -INFINITY)
    rhi[0] = nextafter(ahi - blo, INFINITY)


cdef inline void ia_mul(double alo, double ahi, double blo, double bhi,
                        double* rlo, double* rhi) noexcept:
    cdef double p1 = alo * blo
    cdef double p2 = alo * bhi
    cdef double p3 = ahi * blo
    cdef double p4 = ahi * bhi
    cdef double lo = p1, hi = p1
    if p2 < lo: lo = p2
    if p3 < lo: lo = p3
    if p4 < lo: lo = p4
    if p2 > hi: hi = p2
    if p3 > hi: hi = p3
    if p4 > hi: hi = p4
    if lo != lo or hi != hi:
        rlo[0] = -INFINITY
        rhi[0] = INFINITY
        return
    rlo[0] = nextafter(lo, -INFINITY)
    rhi[0] = nextafter(hi, INFINITY)


cdef inline int _isign(double lo, double hi) noexcept:
    if lo > 0.0:
        return 1
    if hi < 0.0:
        return -1
    return 2


def interval_sign(double lo, double hi):
    return _isign(lo, hi)


cdef inline void det2_i(double alo, double ahi, double blo, double bhi,
                        double clo, double chi, double dlo, double dhi,
                        double* rlo, double* rhi) noexcept:
    # a*d - b*c
    cdef double t1lo, t1hi, t2lo, t2hi
    ia_mul(alo, ahi, dlo, dhi, &t1lo, &t1hi)
    ia_mul(blo, bhi, clo, chi, &t2lo, &t2hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, rlo, rhi)


cdef inline void det3_i(double x1lo, double x1hi, double y1lo, double y1hi,
                        double z1lo, double z1hi,
                        double x2lo, double x2hi, double y2lo, double y2hi,
                        double z2lo, double z2hi,
                        double x3lo, double x3hi, double y3lo, double y3hi,
                        double z3lo, double z3hi,
                        double* rlo, double* rhi) noexcept:
    cdef double m1lo, m1hi, m2lo, m2hi, m3lo, m3hi
    cdef double t1lo, t1hi, t2lo, t2hi, t3lo, t3hi, slo, shi
    det2_i(y2lo, y2hi, z2lo, z2hi, y3lo, y3hi, z3lo, z3hi, &m1lo, &m1hi)
    det2_i(x2lo, x2hi, z2lo, z2hi, x3lo, x3hi, z3lo, z3hi, &m2lo, &m2hi)
    det2_i(x2lo, x2hi, y2lo, y2hi, x3lo, x3hi, y3lo, y3hi, &m3lo, &m3hi)
    ia_mul(x1lo, x1hi, m1lo, m1hi, &t1lo, &t1hi)
    ia_mul(y1lo, y1hi, m2lo, m2hi, &t2lo, &t2hi)
    ia_mul(z1lo, z1hi, m3lo, m3hi, &t3lo, &t3hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, &slo, &shi)
    ia_add(slo, shi, t3lo, t3hi, rlo, rhi)


def orient2d_interval(double ax, double ay, double bx, double by,
                      double cx, double cy):
    cdef double acxlo, acxhi, bcxlo, bcxhi, acylo, acyhi, bcylo, bcyhi
    cdef double t1lo, t1hi, t2lo, t2hi, rlo, rhi
    ia_sub(ax, ax, cx, cx, &acxlo, &acxhi)
    ia_sub(bx, bx, cx, cx, &bcxlo, &bcxhi)
    ia_sub(ay, ay, cy, cy, &acylo, &acyhi)
    ia_sub(by, by, cy, cy, &bcylo, &bcyhi)
    ia_mul(acxlo, acxhi, bcylo, bcyhi, &t1lo, &t1hi)
    ia_mul(acylo, acyhi, bcxlo, bcxhi, &t2lo, &t2hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, &rlo, &rhi)
    return _isign(rlo, rhi)


def orient3d_interval(double ax, double ay, double az, double bx, double by,
                      double bz, double cx, double cy, double cz,
                      double px, double py, double pz):
    cdef double r[18]
    cdef double rlo, rhi
    ia_sub(ax, ax, px, px, &r[0], &r[1])
    ia_sub(ay, ay, py, py, &r[2], &r[3])
    ia_sub(az, az, pz, pz, &r[4], &r[5])
    ia_sub(bx, bx, px, px, &r[6], &r[7])
    ia_sub(by, by, py, py, &r[8], &r[9])
    ia_sub(bz, bz, pz, pz, &r[10], &r[11])
    ia_sub(cx, cx, px, px, &r[12], &r[13])
    ia_sub(cy, cy, py, py, &r[14], &r[15])
    ia_sub(cz, cz, pz, pz, &r[16], &r[17])
    det3_i(r[0], r[1], r[2], r[3], r[4], r[5],
           r[6], r[7], r[8], r[9], r[10], r[11],
           r[12], r[13], r[14], r[15], r[16], r[17], &rlo, &rhi)
    return _isign(rlo, rhi)


cdef inline void _unpack8(object h, double* v) except *:
    cdef int i
    for i in range(8):
        v[i] = h[i]


cdef inline void _unpack6(object h, double* v) except *:
    cdef int i
    for i in range(6):
        v[i] = h[i]


def det3h_sign_interval(h1, h2, h3):
    cdef double a[6]
    cdef double b[6]
    cdef double c[6]
    cdef double rlo, rhi
    _unpack6(h1, a)
    _unpack6(h2, b)
    _unpack6(h3, c)
    det3_i(a[0], a[1], a[2], a[3], a[4], a[5],
           b[0], b[1], b[2], b[3], b[4], b[5],
           c[0], c[1], c[2], c[3], c[4], c[5], &rlo, &rhi)
    return _isign(rlo, rhi)


def det4h_sign_interval(h1, h2, h3, h4):
    cdef double a[8]
    cdef double b[8]
    cdef double c[8]
    cdef double d[8]
    cdef double d1lo, d1hi, d2lo, d2hi, d3lo, d3hi, d4lo, d4hi
    cdef double t1lo, t1hi, t2lo, t2hi, u1lo, u1hi, u2lo, u2hi
    cdef double s1lo, s1hi, s2lo, s2hi, rlo, rhi
    _unpack8(h1, a)
    _unpack8(h2, b)
    _unpack8(h3, c)
    _unpack8(h4, d)
    # Laplace expansion along the W column:
    # det = -Wa*det3(b,c,d) + Wb*det3(a,c,d) - Wc*det3(a,b,d) + Wd*det3(a,b,c)
    det3_i(b[0], b[1], b[2], b[3], b[4], b[5],
           c[0], c[1], c[2], c[3], c[4], c[5],
           d[0], d[1], d[2], d[3], d[4], d[5], &d1lo, &d1hi)
    det3_i(a[0], a[1], a[2], a[3], a[4], a[5],
           c[0], c[1], c[2], c[3], c[4], c[5],
           d[0], d[1], d[2], d[3], d[4], d[5], &d2lo, &d2hi)
    det3_i(a[0], a[1], a[2], a[3], a[4], a[5],
           b[0], b[1], b[2], b[3], b[4], b[5],
           d[0], d[1], d[2], d[3], d[4], d[5], &d3lo, &d3hi)
    det3_i(a[0], a[1], a[2], a[3], a[4], a[5],
           b[0], b[1], b[2], b[3], b[4], b[5],
           c[0], c[1], c[2], c[3], c[4], c[5], &d4lo, &d4hi)
    ia_mul(a[6], a[7], d1lo, d1hi, &t1lo, &t1hi)
    ia_mul(b[6], b[7], d2lo, d2hi, &t2lo, &t2hi)
    ia_sub(t2lo, t2hi, t1lo, t1hi, &s1lo, &s1hi)
    ia_mul(c[6], c[7], d3lo, d3hi, &u1lo, &u1hi)
    ia_mul(d[6], d[7], d4lo, d4hi, &u2lo, &u2hi)
    ia_sub(u2lo, u2hi, u1lo, u1hi, &s2lo, &s2hi)
    ia_add(s1lo, s1hi, s2lo, s2hi, &rlo, &rhi)
    return _isign(rlo, rhi)


def cmp_h_interval(double x1lo, double x1hi, double w1lo, double w1hi,
                   double x2lo, double x2hi, double w2lo, double w2hi):
    cdef double t1lo, t1hi, t2lo, t2hi, rlo, rhi
    ia_mul(x1lo, x1hi, w2lo, w2hi, &t1lo, &t1hi)
    ia_mul(x2lo, x2hi, w1lo, w1hi, &t2lo, &t2hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, &rlo, &rhi)
    return _isign(rlo, rhi)


def orient3d_cached_h_interval(hx, double myz, double mxz, double mxy,
                               double mxyz, double kyz, double kxz,
                               double kxy, double kxyz):
    cdef double h[8]
    cdef double iyzlo, iyzhi, ixzlo, ixzhi, ixylo, ixyhi, ixyzlo, ixyzhi
    cdef double t1lo, t1hi, t2lo, t2hi, s1lo, s1hi, s2lo, s2hi, rlo, rhi
    cdef double rr
    _unpack8(hx, h)
    rr = kyz * _U
    iyzlo = nextafter(myz - rr, -INFINITY); iyzhi = nextafter(myz + rr, INFINITY)
    rr = kxz * _U
    ixzlo = nextafter(mxz - rr, -INFINITY); ixzhi = nextafter(mxz + rr, INFINITY)
    rr = kxy * _U
    ixylo = nextafter(mxy - rr, -INFINITY); ixyhi = nextafter(mxy + rr, INFINITY)
    rr = kxyz * _U
    ixyzlo = nextafter(mxyz - rr, -INFINITY); ixyzhi = nextafter(mxyz + rr, INFINITY)
    # -X*myz + Y*mxz - Z*mxy + W*mxyz
    ia_mul(h[2], h[3], ixzlo, ixzhi, &t1lo, &t1hi)
    ia_mul(h[0], h[1], iyzlo, iyzhi, &t2lo, &t2hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, &s1lo, &s1hi)
    ia_mul(h[6], h[7], ixyzlo, ixyzhi, &t1lo, &t1hi)
    ia_mul(h[4], h[5], ixylo, ixyhi, &t2lo, &t2hi)
    ia_sub(t1lo, t1hi, t2lo, t2hi, &s2lo, &s2hi)
    ia_add(s1lo, s1hi, s2lo, s2hi, &rlo, &rhi)
    return _isign(rlo, rhi)


def lpi_interval(double px, double py, double pz, double qx, double qy,
                 double qz, double rx, double ry, double rz, double sx,
                 double sy, double sz, double tx, double ty, double tz):
    cdef double axlo, axhi, aylo, ayhi, azlo, azhi
    cdef double bxlo, bxhi, bylo, byhi, bzlo, bzhi
    cdef double nxlo, nxhi, nylo, nyhi, nzlo, nzhi
    cdef double dxlo, dxhi, dylo, dyhi, dzlo, dzhi
    cdef double exlo, exhi, eylo, eyhi, ezlo, ezhi
    cdef double wlo, whi, numlo, numhi
    cdef double t1lo, t1hi, t2lo, t2hi, t3lo, t3hi, slo, shi
    cdef double Xlo, Xhi, Ylo, Yhi, Zlo, Zhi

    ia_sub(sx, sx, rx, rx, &axlo, &axhi)
    ia_sub(sy, sy, ry, ry, &aylo, &ayhi)
    ia_sub(sz, sz, rz, rz, &azlo, &azhi)
    ia_sub(tx, tx, rx, rx, &bxlo, &bxhi)
    ia_sub(ty, ty, ry, ry, &bylo, &byhi)
    ia_sub(tz, tz, rz, rz, &bzlo, &bzhi)
    det2_i(aylo, ayhi, azlo, azhi, bylo, byhi, bzlo, bzhi, &nxlo, &nxhi)
    det2_i(azlo, azhi, axlo, axhi, bzlo, bzhi, bxlo, bxhi, &nylo, &nyhi)
    det2_i(axlo, axhi, aylo, ayhi, bxlo, bxhi, bylo, byhi, &nzlo, &nzhi)

    ia_sub(qx, qx, px, px, &dxlo, &dxhi)
    ia_sub(qy, qy, py, py, &dylo, &dyhi)
    ia_sub(qz, qz, pz, pz, &dzlo, &dzhi)
    ia_mul(nxlo, nxhi, dxlo, dxhi, &t1lo, &t1hi)
    ia_mul(nylo, nyhi, dylo, dyhi, &t2lo, &t2hi)
    ia_mul(nzlo, nzhi, dzlo, dzhi, &t3lo, &t3hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &slo, &shi)
    ia_add(slo, shi, t3lo, t3hi, &wlo, &whi)

    ia_sub(rx, rx, px, px, &exlo, &exhi)
    ia_sub(ry, ry, py, py, &eylo, &eyhi)
    ia_sub(rz, rz, pz, pz, &ezlo, &ezhi)
    ia_mul(nxlo, nxhi, exlo, exhi, &t1lo, &t1hi)
    ia_mul(nylo, nyhi, eylo, eyhi, &t2lo, &t2hi)
    ia_mul(nzlo, nzhi, ezlo, ezhi, &t3lo, &t3hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &slo, &shi)
    ia_add(slo, shi, t3lo, t3hi, &numlo, &numhi)

    ia_mul(px, px, wlo, whi, &t1lo, &t1hi)
    ia_mul(numlo, numhi, dxlo, dxhi, &t2lo, &t2hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &Xlo, &Xhi)
    ia_mul(py, py, wlo, whi, &t1lo, &t1hi)
    ia_mul(numlo, numhi, dylo, dyhi, &t2lo, &t2hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &Ylo, &Yhi)
    ia_mul(pz, pz, wlo, whi, &t1lo, &t1hi)
    ia_mul(numlo, numhi, dzlo, dzhi, &t2lo, &t2hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &Zlo, &Zhi)
    return (Xlo, Xhi, Ylo, Yhi, Zlo, Zhi, wlo, whi)


cdef void _plane_eq_i(double px, double py, double pz, double qx, double qy,
                      double qz, double rx, double ry, double rz,
                      double* out) noexcept:
    # out: nx lo/hi, ny lo/hi, nz lo/hi, d lo/hi
    cdef double axlo, axhi, aylo, ayhi, azlo, azhi
    cdef double bxlo, bxhi, bylo, byhi, bzlo, bzhi
    cdef double t1lo, t1hi, t2lo, t2hi, t3lo, t3hi, slo, shi
    ia_sub(qx, qx, px, px, &axlo, &axhi)
    ia_sub(qy, qy, py, py, &aylo, &ayhi)
    ia_sub(qz, qz, pz, pz, &azlo, &azhi)
    ia_sub(rx, rx, px, px, &bxlo, &bxhi)
    ia_sub(ry, ry, py, py, &bylo, &byhi)
    ia_sub(rz, rz, pz, pz, &bzlo, &bzhi)
    det2_i(aylo, ayhi, azlo, azhi, bylo, byhi, bzlo, bzhi, &out[0], &out[1])
    det2_i(azlo, azhi, axlo, axhi, bzlo, bzhi, bxlo, bxhi, &out[2], &out[3])
    det2_i(axlo, axhi, aylo, ayhi, bxlo, bxhi, bylo, byhi, &out[4], &out[5])
    ia_mul(out[0], out[1], px, px, &t1lo, &t1hi)
    ia_mul(out[2], out[3], py, py, &t2lo, &t2hi)
    ia_mul(out[4], out[5], pz, pz, &t3lo, &t3hi)
    ia_add(t1lo, t1hi, t2lo, t2hi, &slo, &shi)
    ia_add(slo, shi, t3lo, t3hi, &out[6], &out[7])


def tpi_interval(double p1x, double p1y, double p1z, double q1x, double q1y,
                 double q1z, double r1x, double r1y, double r1z,
                 double p2x, double p2y, double p2z, double q2x, double q2y,
                 double q2z, double r2x, double r2y, double r2z,
                 double p3x, double p3y, double p3z, double q3x, double q3y,
                 double q3z, double r3x, double r3y, double r3z):
    cdef double e1[8]
    cdef double e2[8]
    cdef double e3[8]
    cdef double Xlo, Xhi, Ylo, Yhi, Zlo, Zhi, wlo, whi
    _plane_eq_i(p1x, p1y, p1z, q1x, q1y, q1z, r1x, r1y, r1z, e1)
    _plane_eq_i(p2x, p2y, p2z, q2x, q2y, q2z, r2x, r2y, r2z, e2)
    _plane_eq_i(p3x, p3y, p3z, q3x, q3y, q3z, r3x, r3y, r3z, e3)
    det3_i(e1[0], e1[1], e1[2], e1[3], e1[4], e1[5],
           e2[0], e2[1], e2[2], e2[3], e2[4], e2[5],
           e3[0], e3[1], e3[2], e3[3], e3[4], e3[5], &wlo, &whi)
    det3_i(e1[6], e1[7], e1[2], e1[3], e1[4], e1[5],
           e2[6], e2[7], e2[2], e2[3], e2[4], e2[5],
           e3[6], e3[7], e3[2], e3[3], e3[4], e3[5], &Xlo, &Xhi)
    det3_i(e1[0], e1[1], e1[6], e1[7], e1[4], e1[5],
           e2[0], e2[1], e2[6], e2[7], e2[4], e2[5],
           e3[0], e3[1], e3[6], e3[7], e3[4], e3[5], &Ylo, &Yhi)
    det3_i(e1[0], e1[1], e1[2], e1[3], e1[6], e1[7],
           e2[0], e2[1], e2[2], e2[3], e2[6], e2[7],
           e3[0], e3[1], e3[2], e3[3], e3[6], e3[7], &Zlo, &Zhi)
    return (Xlo, Xhi, Ylo, Yhi, Zlo, Zhi, wlo, whi)


def point_in_tri_2d_filter(double px, double py, double ax, double ay,
                           double bx, double by, double cx, double cy):
    cdef int s1 = _o2d_filter(ax, ay, bx, by, px, py)
    if s1 == 2:
        return 3
    cdef int s2 = _o2d_filter(bx, by, cx, cy, px, py)
    if s2 == 2:
        return 3
    if s1 * s2 < 0:
        return 2
    cdef int s3 = _o2d_filter(cx, cy, ax, ay, px, py)
    if s3 == 2:
        return 3
    if s1 * s3 < 0 or s2 * s3 < 0:
        return 2
    if s1 == 0 or s2 == 0 or s3 == 0:
        return 1
    return 0


# ---------------------------------------------------------------------------
# octree build and the candidate-pair scan


cdef struct _BuildNode:
    double box[6]
    int children[8]
    long long leaf_start
    long long leaf_count


cdef void _build_rec(vector[_BuildNode]& nodes, vector[long long]& items,
                     vector[long long]& node_items_flat,
                     long long node_id, vector[long long]& node_items,
                     const double[:, ::1] boxes, int depth,
                     int leaf_capacity, int max_depth) noexcept:
    cdef long long n = <long long> node_items.size()
    cdef int ci, k
    cdef long long i, t
    cdef double midx, midy, midz
    cdef double cxmin, cymin, czmin, cxmax, cymax, czmax
    cdef vector[long long] child_items
    cdef long long child_id

    if n <= leaf_capacity or depth >= max_depth:
        nodes[<size_t> node_id].leaf_start = <long long> node_items_flat.size()
        nodes[<size_t> node_id].leaf_count = n
        for i in range(n):
            node_items_flat.push_back(node_items[<size_t> i])
        return

    midx = 0.5 * (nodes[<size_t> node_id].box[0] + nodes[<size_t> node_id].box[3])
    midy = 0.5 * (nodes[<size_t> node_id].box[1] + nodes[<size_t> node_id].box[4])
    midz = 0.5 * (nodes[<size_t> node_id].box[2] + nodes[<size_t> node_id].box[5])

    for ci in range(8):
        cxmin = nodes[<size_t> node_id].box[0] if (ci & 1) == 0 else midx
        cxmax = midx if (ci & 1) == 0 else nodes[<size_t> node_id].box[3]
        cymin = nodes[<size_t> node_id].box[1] if (ci & 2) == 0 else midy
        cymax = midy if (ci & 2) == 0 else nodes[<size_t> node_id].box[4]
        czmin = nodes[<size_t> node_id].box[2] if (ci & 4) == 0 else midz
        czmax = midz if (ci & 4) == 0 else nodes[<size_t> node_id].box[5]

        child_items.clear()
        for i in range(n):
            t = node_items[<size_t> i]
            if (boxes[t, 0] <= cxmax and boxes[t, 3] >= cxmin
                    and boxes[t, 1] <= cymax and boxes[t, 4] >= cymin
                    and boxes[t, 2] <= czmax and boxes[t, 5] >= czmin):
                child_items.push_back(t)
        if child_items.size() == 0:
            nodes[<size_t> node_id].children[ci] = -1
            continue
        child_id = <long long> nodes.size()
        nodes[<size_t> node_id].children[ci] = <int> child_id
        nodes.push_back(_BuildNode())
        nodes[<size_t> child_id].box[0] = cxmin
        nodes[<size_t> child_id].box[1] = cymin
        nodes[<size_t> child_id].box[2] = czmin
        nodes[<size_t> child_id].box[3] = cxmax
        nodes[<size_t> child_id].box[4] = cymax
        nodes[<size_t> child_id].box[5] = czmax
        for k in range(8):
            nodes[<size_t> child_id].children[k] = -1
        nodes[<size_t> child_id].leaf_start = -1
        nodes[<size_t> child_id].leaf_count = 0
        _build_rec(nodes, items, node_items_flat, child_id, child_items,
                   boxes, depth + 1, leaf_capacity, max_depth)


def octree_build(const double[:, ::1] boxes, root_box, int leaf_capacity,
                 int max_depth):
    """Build an octree over triangle AABBs.  Straddling boxes are stored in
    every overlapping child (closed-interval tests), so queries only need
    a final dedup."""
    cdef vector[_BuildNode] nodes
    cdef vector[long long] items_dummy
    cdef vector[long long] flat
    cdef vector[long long] root_items
    cdef long long t, n = boxes.shape[0]
    cdef int k

    nodes.push_back(_BuildNode())
    for k in range(6):
        nodes[0].box[k] = root_box[k]
    for k in range(8):
        nodes[0].children[k] = -1
    nodes[0].leaf_start = -1
    nodes[0].leaf_count = 0
    for t in range(n):
        root_items.push_back(t)
    _build_rec(nodes, items_dummy, flat, 0, root_items, boxes, 0,
               leaf_capacity, max_depth)

    cdef long long nn = <long long> nodes.size()
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_boxes = np.empty((nn, 6))
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out_children = np.empty((nn, 8), dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_start = np.empty(nn, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_count = np.empty(nn, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_items = np.empty(<long long> flat.size(), dtype=np.int64)
    cdef long long i
    for i in range(nn):
        for k in range(6):
            out_boxes[i, k] = nodes[<size_t> i].box[k]
        for k in range(8):
            out_children[i, k] = nodes[<size_t> i].children[k]
        out_start[i] = nodes[<size_t> i].leaf_start
        out_count[i] = nodes[<size_t> i].leaf_count
    for i in range(<long long> flat.size()):
        out_items[i] = flat[<size_t> i]
    return out_boxes, out_children, out_start, out_count, out_items


def candidate_pairs(const cnp.int64_t[::1] leaf_start,
                    const cnp.int64_t[::1] leaf_count,
                    const cnp.int64_t[::1] items,
                    const double[:, ::1] boxes,
                    const cnp.int64_t[::1] labels,
                    bint cross_only):
    """Unique (i, j) triangle pairs (i < j) sharing a leaf with overlapping
    AABBs; with cross_only, pairs from the same input mesh are skipped."""
    cdef unordered_set[long long] seen
    cdef vector[long long] keys
    cdef long long L = leaf_start.shape[0]
    cdef long long T = boxes.shape[0]
    cdef long long li, a, b, i, j, ti, tj, key
    for li in range(L):
        if leaf_count[li] <= 1:
            continue
        for a in range(leaf_count[li]):
            ti = items[leaf_start[li] + a]
            for b in range(a + 1, leaf_count[li]):
                tj = items[leaf_start[li] + b]
                if cross_only and labels[ti] == labels[tj]:
                    continue
                i = ti if ti < tj else tj
                j = tj if ti < tj else ti
                if (boxes[i, 0] <= boxes[j, 3] and boxes[i, 3] >= boxes[j, 0]
                        and boxes[i, 1] <= boxes[j, 4] and boxes[i, 4] >= boxes[j, 1]
                        and boxes[i, 2] <= boxes[j, 5] and boxes[i, 5] >= boxes[j, 2]):
                    key = i * T + j
                    if seen.insert(key).second:
                        keys.push_back(key)
    cpp_sort(keys.begin(), keys.end())
    cdef long long K = <long long> keys.size()
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((K, 2), dtype=np.int64)
    cdef long long m
    for m in range(K):
        out[m, 0] = keys[<size_t> m] // T
        out[m, 1] = keys[<size_t> m] % T
    return out
