"""Point representations used by the exact kernel.

Intersection points are never rounded to floats inside the pipeline.
They are kept in implicit form — the floats that *define* them (a line
and a plane, or three planes) — and every query about them goes through
the sign cascade on homogeneous coordinates (X, Y, Z, W).  W may be
negative; predicates correct for its sign.
"""

from __future__ import annotations

import math

from ..exactnum import rat_to_float
from ..exactnum import rational as _Q
from . import exact as _exact


class ExplicitPoint3:
    """A point with known double coordinates."""

    __slots__ = ("x", "y", "z")
    kind = 0

    def __init__(self, x, y, z):
        self.x = x
        self.y = y
        self.z = z

    def approx(self):
        return (self.x, self.y, self.z)

    def interval_homo(self):
        return (self.x, self.x, self.y, self.y, self.z, self.z, 1.0, 1.0)

    def exact_homo(self):
        return _exact.homo_explicit(self.x, self.y, self.z)

    def __repr__(self):
        return f"ExplicitPoint3({self.x}, {self.y}, {self.z})"


class ImplicitPointLPI:
    """Intersection of line(p, q) with plane(r, s, t).

    Valid only when the line meets the plane in exactly one point
    (W != 0); construction sites certify that with sign tests first.
    """

    __slots__ = ("p", "q", "r", "s", "t", "_ih", "_eh", "_ap")
    kind = 1

    def __init__(self, p, q, r, s, t):
        self.p = tuple(map(float, p))
        self.q = tuple(map(float, q))
        self.r = tuple(map(float, r))
        self.s = tuple(map(float, s))
        self.t = tuple(map(float, t))
        self._ih = None
        self._eh = None
        self._ap = None

    def interval_homo(self):
        ih = self._ih
        if ih is None:
            from . import _backend

            ih = self._ih = _backend.lpi_interval(
                *self.p, *self.q, *self.r, *self.s, *self.t
            )
        return ih

    def exact_homo(self):
        eh = self._eh
        if eh is None:
            eh = self._eh = _exact.homo_lpi(
                *self.p, *self.q, *self.r, *self.s, *self.t
            )
            if eh[3] == 0:
                raise ValueError("line does not meet plane in a single point")
        return eh

    def approx(self):
        ap = self._ap
        if ap is None:
            x, y, z, w = self.exact_homo()
            ap = self._ap = (
                rat_to_float(x / w),
                rat_to_float(y / w),
                rat_to_float(z / w),
            )
        return ap

    def __repr__(self):
        x, y, z = self.approx()
        return f"<LPI ~({x:.17g}, {y:.17g}, {z:.17g})>"


class ImplicitPointTPI:
    """Common point of the supporting planes of three triangles.

    Valid only when the planes meet in exactly one point (W != 0).
    """

    __slots__ = ("t1", "t2", "t3", "_ih", "_eh", "_ap")
    kind = 2

    def __init__(self, t1, t2, t3):
        self.t1 = tuple(map(float, t1))
        self.t2 = tuple(map(float, t2))
        self.t3 = tuple(map(float, t3))
        self._ih = None
        self._eh = None
        self._ap = None

    def interval_homo(self):
        ih = self._ih
        if ih is None:
            from . import _backend

            ih = self._ih = _backend.tpi_interval(
                *self.t1, *self.t2, *self.t3
            )
        return ih

    def exact_homo(self):
        eh = self._eh
        if eh is None:
            eh = self._eh = _exact.homo_tpi(self.t1, self.t2, self.t3)
            if eh[3] == 0:
                raise ValueError("planes do not meet in a single point")
        return eh

    def approx(self):
        ap = self._ap
        if ap is None:
            x, y, z, w = self.exact_homo()
            ap = self._ap = (
                rat_to_float(x / w),
                rat_to_float(y / w),
                rat_to_float(z / w),
            )
        return ap

    def __repr__(self):
        x, y, z = self.approx()
        return f"<TPI ~({x:.17g}, {y:.17g}, {z:.17g})>"


class RationalPoint:
    """A point with exact rational coordinates (internal use: exact ray
    origins).  Not produced by the arrangement itself."""

    __slots__ = ("coords", "_ih", "_ap")
    kind = 3

    def __init__(self, x, y, z):
        self.coords = (x, y, z)
        self._ih = None
        self._ap = None

    def approx(self):
        ap = self._ap
        if ap is None:
            ap = self._ap = tuple(rat_to_float(c) for c in self.coords)
        return ap

    def interval_homo(self):
        ih = self._ih
        if ih is None:
            out = []
            for c, f in zip(self.coords, self.approx()):
                if math.isfinite(f) and c == _Q(f):
                    out.extend((f, f))
                else:
                    # f is the nearest double, so one ulp out on each side
                    # is guaranteed to bracket the exact value
                    out.extend(
                        (math.nextafter(f, -math.inf), math.nextafter(f, math.inf))
                    )
            ih = self._ih = (*out, 1.0, 1.0)
        return ih

    def exact_homo(self):
        x, y, z = self.coords
        return (x, y, z, _Q(1))

    def __repr__(self):
        x, y, z = self.approx()
        return f"<RationalPoint ~({x:.17g}, {y:.17g}, {z:.17g})>"


GENERIC_POINT_KINDS = (ExplicitPoint3, ImplicitPointLPI, ImplicitPointTPI)


class PlaneCache:
    """Cached cofactors of the supporting plane of triangle (a, b, c).

    Float minors come with forward error multiples of the unit roundoff
    (kyz..kxyz); the exact rational minors are computed lazily the first
    time a filtered query fails.  A cache built from collinear corners is
    usable: it reports every query point as coplanar (Zero).
    """

    __slots__ = (
        "coords",
        "myz",
        "mxz",
        "mxy",
        "mxyz",
        "kyz",
        "kxz",
        "kxy",
        "kxyz",
        "_exact_minors",
    )

    def __init__(self, coords, minors):
        self.coords = coords  # flat (ax, ay, az, bx, by, bz, cx, cy, cz)
        (
            self.myz,
            self.mxz,
            self.mxy,
            self.mxyz,
            self.kyz,
            self.kxz,
            self.kxy,
            self.kxyz,
        ) = minors
        self._exact_minors = None

    def exact_minors(self):
        em = self._exact_minors
        if em is None:
            em = self._exact_minors = _exact.plane_minors_exact(*self.coords)
        return em

    @property
    def is_degenerate(self):
        return all(m == 0 for m in self.exact_minors()[:3])

    def __repr__(self):
        return f"<PlaneCache n~({-self.myz:.3g}, {self.mxz:.3g}, {-self.mxy:.3g})>"
