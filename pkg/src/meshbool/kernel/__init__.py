"""Exact geometric predicate kernel.

All sign decisions in the pipeline funnel through this module.  Each
predicate runs a three-stage cascade: a semi-static floating point filter
(explicit coordinates only), outward-rounded interval arithmetic, and an
exact rational evaluation that cannot fail.  The first two stages live in
a swappable backend — a compiled extension when available, a pure-python
mirror otherwise — while the exact stage is shared.

Implicit intersection points participate through lazily cached
homogeneous coordinates; see :mod:`meshbool.kernel.points`.
"""

from __future__ import annotations

import math
import os
from enum import IntEnum

from ..errors import InvalidInput
from ..exactnum import sign_of
from . import _pyimpl
from . import exact as _exactmod
from .points import (
    ExplicitPoint3,
    ImplicitPointLPI,
    ImplicitPointTPI,
    PlaneCache,
    RationalPoint,
)

__all__ = [
    "Sign",
    "PointLocation",
    "ExplicitPoint3",
    "ImplicitPointLPI",
    "ImplicitPointTPI",
    "RationalPoint",
    "PlaneCache",
    "orient3d",
    "orient3d_generic",
    "orient2d_projected",
    "compare_on_axis",
    "make_plane_cache",
    "orient3d_cached",
    "orient3d_plane",
    "point_in_triangle_2d",
    "approximate",
    "stats",
    "use_backend",
    "backend_name",
    "available_backends",
    "force_exact",
    "exact_forced",
]


class Sign(IntEnum):
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


class PointLocation(IntEnum):
    INSIDE = 0
    ON_BOUNDARY = 1
    OUTSIDE = 2


_SIGN = {-1: Sign.NEGATIVE, 0: Sign.ZERO, 1: Sign.POSITIVE}
_UNCERTAIN = _pyimpl.UNCERTAIN


class KernelStats:
    """Counts how often each cascade stage resolved a predicate."""

    __slots__ = ("filter", "interval", "exact")

    def __init__(self):
        self.reset()

    def reset(self):
        self.filter = 0
        self.interval = 0
        self.exact = 0

    def snapshot(self):
        return {
            "filter": self.filter,
            "interval": self.interval,
            "exact": self.exact,
        }

    def __repr__(self):
        return f"KernelStats(filter={self.filter}, interval={self.interval}, exact={self.exact})"


stats = KernelStats()

_force_exact = False


def force_exact(enabled=True):
    """Route every predicate straight to the exact rational stage, skipping
    the filter and interval tiers.  Signs are identical by construction —
    the exact stage is the cascade's ground truth — so this changes only
    timings and tier statistics; it exists for cascade audits."""
    global _force_exact
    _force_exact = bool(enabled)


def exact_forced():
    return _force_exact


# ---------------------------------------------------------------------------
# backend selection

_backends = {"python": _pyimpl}
try:  # pragma: no cover - depends on how the package was built
    from .. import _native

    _backends["native"] = _native
except ImportError:  # pragma: no cover
    _native = None

if os.environ.get("MESHBOOL_PURE") == "1" or "native" not in _backends:
    _backend = _pyimpl
    _backend_name = "python"
else:
    _backend = _backends["native"]
    _backend_name = "native"


def available_backends():
    return sorted(_backends)


def backend_name():
    return _backend_name


def use_backend(name):
    """Switch the filter/interval backend ("native" or "python")."""
    global _backend, _backend_name
    if name not in _backends:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    _backend = _backends[name]
    _backend_name = name


# ---------------------------------------------------------------------------
# helpers


_AXIS = {0: 0, 1: 1, 2: 2, "x": 0, "y": 1, "z": 2, "X": 0, "Y": 1, "Z": 2}
_KEPT = ((1, 2), (0, 2), (0, 1))


def _axis_index(axis):
    try:
        return _AXIS[axis]
    except KeyError:
        raise InvalidInput(f"bad axis {axis!r}") from None


def wrap_point(p):
    """Coerce float triples to ExplicitPoint3; pass point objects through."""
    if hasattr(p, "kind"):
        return p
    x, y, z = p
    return ExplicitPoint3(float(x), float(y), float(z))


def _wsign(p):
    """Certified sign of a point's homogeneous W (never zero for valid points)."""
    if p.kind == 0 or p.kind == 3:
        return 1
    ih = p.interval_homo()
    if ih[6] > 0.0:
        return 1
    if ih[7] < 0.0:
        return -1
    return sign_of(p.exact_homo()[3])


def _h2d(p, u, v):
    """Interval homogeneous row (U, V, W) of a point in a dropped-axis frame."""
    ih = p.interval_homo()
    return (
        ih[2 * u],
        ih[2 * u + 1],
        ih[2 * v],
        ih[2 * v + 1],
        ih[6],
        ih[7],
    )


def _e2d(p, u, v):
    eh = p.exact_homo()
    return (eh[u], eh[v], eh[3])


# ---------------------------------------------------------------------------
# predicates


def orient3d(a, b, c, p):
    """Sign of the orientation determinant of explicit points: positive when
    p sees (a, b, c) wound counterclockwise from the negative side."""
    a = wrap_point(a)
    b = wrap_point(b)
    c = wrap_point(c)
    p = wrap_point(p)
    if a.kind or b.kind or c.kind or p.kind:
        return orient3d_generic(a, b, c, p)
    return _SIGN[
        _orient3d_explicit(
            a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z, p.x, p.y, p.z
        )
    ]


def _orient3d_explicit(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz):
    if not _force_exact:
        s = _backend.orient3d_filter(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz)
        if s != _UNCERTAIN:
            stats.filter += 1
            return s
        s = _backend.orient3d_interval(ax, ay, az, bx, by, bz, cx, cy, cz, px, py, pz)
        if s != _UNCERTAIN:
            stats.interval += 1
            return s
    stats.exact += 1
    return _exactmod.det4h_sign(
        _exactmod.homo_explicit(ax, ay, az),
        _exactmod.homo_explicit(bx, by, bz),
        _exactmod.homo_explicit(cx, cy, cz),
        _exactmod.homo_explicit(px, py, pz),
    )


def orient3d_generic(a, b, c, p):
    """orient3d for any mix of explicit and implicit points."""
    a = wrap_point(a)
    b = wrap_point(b)
    c = wrap_point(c)
    p = wrap_point(p)
    if not (a.kind or b.kind or c.kind or p.kind):
        return orient3d(a, b, c, p)
    pts = (a, b, c, p)
    s = _UNCERTAIN if _force_exact else _backend.det4h_sign_interval(
        *(q.interval_homo() for q in pts)
    )
    if s != _UNCERTAIN:
        wprod = 1
        certain = True
        for q in pts:
            if q.kind in (0, 3):
                continue
            ih = q.interval_homo()
            if ih[6] > 0.0:
                continue
            if ih[7] < 0.0:
                wprod = -wprod
                continue
            certain = False
            break
        if certain:
            stats.interval += 1
            return _SIGN[s * wprod]
    stats.exact += 1
    ehs = [q.exact_homo() for q in pts]
    s = _exactmod.det4h_sign(*ehs)
    for eh in ehs:
        if eh[3] < 0:
            s = -s
    return _SIGN[s]


def orient2d_projected(a, b, c, axis):
    """orient2d of three points after dropping one coordinate axis."""
    k = _axis_index(axis)
    u, v = _KEPT[k]
    a = wrap_point(a)
    b = wrap_point(b)
    c = wrap_point(c)
    if not (a.kind or b.kind or c.kind):
        return _SIGN[
            _orient2d_explicit(
                a.approx()[u], a.approx()[v],
                b.approx()[u], b.approx()[v],
                c.approx()[u], c.approx()[v],
            )
        ]
    pts = (a, b, c)
    s = _UNCERTAIN if _force_exact else _backend.det3h_sign_interval(
        *(_h2d(q, u, v) for q in pts)
    )
    if s != _UNCERTAIN:
        wprod = 1
        certain = True
        for q in pts:
            if q.kind in (0, 3):
                continue
            ih = q.interval_homo()
            if ih[6] > 0.0:
                continue
            if ih[7] < 0.0:
                wprod = -wprod
                continue
            certain = False
            break
        if certain:
            stats.interval += 1
            return _SIGN[s * wprod]
    stats.exact += 1
    ehs = [_e2d(q, u, v) for q in pts]
    s = _exactmod.det3h_sign(*ehs)
    for eh in ehs:
        if eh[2] < 0:
            s = -s
    return _SIGN[s]


def _orient2d_explicit(ax, ay, bx, by, cx, cy):
    if not _force_exact:
        s = _backend.orient2d_filter(ax, ay, bx, by, cx, cy)
        if s != _UNCERTAIN:
            stats.filter += 1
            return s
        s = _backend.orient2d_interval(ax, ay, bx, by, cx, cy)
        if s != _UNCERTAIN:
            stats.interval += 1
            return s
    stats.exact += 1
    return _exactmod.det3h_sign(
        _exactmod.homo_explicit(ax, ay, 1)[:3],
        _exactmod.homo_explicit(bx, by, 1)[:3],
        _exactmod.homo_explicit(cx, cy, 1)[:3],
    )


def compare_on_axis(p, q, axis):
    """Three-way exact comparison of one coordinate of two points:
    -1 if p's coordinate is smaller, 0 if equal, +1 if greater."""
    k = _axis_index(axis)
    p = wrap_point(p)
    q = wrap_point(q)
    if p.kind == 0 and q.kind == 0:
        pa = p.approx()[k]
        qa = q.approx()[k]
        stats.filter += 1
        if pa < qa:
            return Sign.NEGATIVE
        if pa > qa:
            return Sign.POSITIVE
        return Sign.ZERO
    ihp = p.interval_homo()
    ihq = q.interval_homo()
    s = _UNCERTAIN if _force_exact else _backend.cmp_h_interval(
        ihp[2 * k], ihp[2 * k + 1], ihp[6], ihp[7],
        ihq[2 * k], ihq[2 * k + 1], ihq[6], ihq[7],
    )
    if s != _UNCERTAIN:
        wp = 1 if ihp[6] > 0.0 else (-1 if ihp[7] < 0.0 else 0)
        wq = 1 if ihq[6] > 0.0 else (-1 if ihq[7] < 0.0 else 0)
        if wp and wq:
            stats.interval += 1
            return _SIGN[s * wp * wq]
    stats.exact += 1
    ehp = p.exact_homo()
    ehq = q.exact_homo()
    s = sign_of(ehp[k] * ehq[3] - ehq[k] * ehp[3])
    if ehp[3] < 0:
        s = -s
    if ehq[3] < 0:
        s = -s
    return _SIGN[s]


def points_equal(p, q):
    """Exact coordinate equality of two points."""
    return (
        compare_on_axis(p, q, 0) == 0
        and compare_on_axis(p, q, 1) == 0
        and compare_on_axis(p, q, 2) == 0
    )


def make_plane_cache(a, b, c):
    """Precompute the four plane cofactors of triangle (a, b, c) with float
    values, forward error bounds, and a lazy exact fallback.  A cache from
    collinear corners is usable; queries against it return Zero."""
    a = wrap_point(a)
    b = wrap_point(b)
    c = wrap_point(c)
    coords = (*a.approx(), *b.approx(), *c.approx())
    return PlaneCache(coords, _backend.plane_minors(*coords))


def orient3d_cached(cache, p):
    """orient3d of an explicit point against a cached plane; equals
    orient3d(a, b, c, p) for the cache's defining triangle, for all inputs."""
    p = wrap_point(p)
    if p.kind not in (0, 3):
        return orient3d_plane(cache, p)
    if p.kind == 0 and not _force_exact:
        px, py, pz = p.x, p.y, p.z
        s = _backend.orient3d_cached_filter(
            px, py, pz,
            cache.myz, cache.mxz, cache.mxy, cache.mxyz,
            cache.kyz, cache.kxz, cache.kxy, cache.kxyz,
        )
        if s != _UNCERTAIN:
            stats.filter += 1
            return _SIGN[s]
    s = _UNCERTAIN if _force_exact else _backend.orient3d_cached_h_interval(
        p.interval_homo(),
        cache.myz, cache.mxz, cache.mxy, cache.mxyz,
        cache.kyz, cache.kxz, cache.kxy, cache.kxyz,
    )
    if s != _UNCERTAIN:
        stats.interval += 1
        return _SIGN[s]
    stats.exact += 1
    return _SIGN[_exactmod.orient3d_cached_sign(p.exact_homo(), cache.exact_minors())]


def orient3d_plane(cache, p):
    """orient3d of a generic point against a cached plane (W-sign corrected)."""
    p = wrap_point(p)
    if p.kind in (0, 3):
        return orient3d_cached(cache, p)
    ih = p.interval_homo()
    s = _UNCERTAIN if _force_exact else _backend.orient3d_cached_h_interval(
        ih,
        cache.myz, cache.mxz, cache.mxy, cache.mxyz,
        cache.kyz, cache.kxz, cache.kxy, cache.kxyz,
    )
    if s != _UNCERTAIN:
        if ih[6] > 0.0:
            stats.interval += 1
            return _SIGN[s]
        if ih[7] < 0.0:
            stats.interval += 1
            return _SIGN[-s]
    stats.exact += 1
    eh = p.exact_homo()
    s = _exactmod.orient3d_cached_sign(eh, cache.exact_minors())
    if eh[3] < 0:
        s = -s
    return _SIGN[s]


def point_in_triangle_2d(p, a, b, c, axis):
    """Locate a point against a triangle after dropping one axis.  The
    projected triangle must not be degenerate."""
    k = _axis_index(axis)
    p = wrap_point(p)
    a = wrap_point(a)
    b = wrap_point(b)
    c = wrap_point(c)
    if not (p.kind or a.kind or b.kind or c.kind) and not _force_exact:
        u, v = _KEPT[k]
        code = _backend.point_in_tri_2d_filter(
            p.approx()[u], p.approx()[v],
            a.approx()[u], a.approx()[v],
            b.approx()[u], b.approx()[v],
            c.approx()[u], c.approx()[v],
        )
        if code != 3:
            return PointLocation(code)
    s1 = orient2d_projected(a, b, p, k)
    s2 = orient2d_projected(b, c, p, k)
    if s1 * s2 < 0:
        return PointLocation.OUTSIDE
    s3 = orient2d_projected(c, a, p, k)
    if s1 * s3 < 0 or s2 * s3 < 0:
        return PointLocation.OUTSIDE
    if s1 == 0 or s2 == 0 or s3 == 0:
        return PointLocation.ON_BOUNDARY
    return PointLocation.INSIDE


def approximate(p):
    """Correctly rounded double coordinates of any point."""
    return wrap_point(p).approx()


def next_after(x, toward):
    """One representable double step from x toward the second argument."""
    return math.nextafter(x, toward)
