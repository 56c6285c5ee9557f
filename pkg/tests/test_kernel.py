"""Predicate kernel tests.

Reference values come from the independent rational oracle in
``_rational_oracle``; the kernel must agree with it for every input,
whatever cascade stage ends up deciding.
"""

import math
import random
from fractions import Fraction as F

import pytest

import _rational_oracle as oracle
from meshbool import kernel as K
from meshbool.kernel import (
    ExplicitPoint3,
    ImplicitPointLPI,
    ImplicitPointTPI,
    PointLocation,
    RationalPoint,
    Sign,
)


def mpq_to_fraction(q):
    return F(int(q.numerator), int(q.denominator))


# ---------------------------------------------------------------------------
# pinned single cases


def test_orient3d_reference_tetrahedron(backend):
    assert K.orient3d((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)) == Sign.NEGATIVE
    assert K.orient3d((0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1)) == Sign.POSITIVE
    assert K.orient3d((0, 0, 0), (1, 0, 0), (0, 1, 0), (0.3, 0.4, 0)) == Sign.ZERO


def test_plane_cache_unit_triangle(backend):
    cache = K.make_plane_cache((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert (cache.myz, cache.mxz, cache.mxy, cache.mxyz) == (0.0, 0.0, 1.0, 0.0)
    assert not cache.is_degenerate
    assert K.orient3d_cached(cache, (0, 0, 1)) == Sign.NEGATIVE
    assert K.orient3d_cached(cache, (5, -3, 0)) == Sign.ZERO
    assert K.orient3d_cached(cache, (0.25, 0.25, -1e-300)) == Sign.POSITIVE


def test_degenerate_plane_cache_is_total(backend):
    cache = K.make_plane_cache((0, 0, 0), (1, 1, 1), (2, 2, 2))
    assert cache.is_degenerate
    for p in [(0, 0, 1), (3, -2, 0.5), (0, 0, 0)]:
        assert K.orient3d_cached(cache, p) == Sign.ZERO


def test_lpi_diagonal_through_midplane(backend):
    # line (0,0,0)-(1,1,1) meets plane z=0.5 at (0.5, 0.5, 0.5)
    p = ImplicitPointLPI(
        (0, 0, 0), (1, 1, 1), (0, 0, 0.5), (1, 0, 0.5), (0, 1, 0.5)
    )
    ref = oracle.line_plane_point(
        (0, 0, 0), (1, 1, 1), (0, 0, 0.5), (1, 0, 0.5), (0, 1, 0.5)
    )
    assert ref == (F(1, 2), F(1, 2), F(1, 2))
    assert p.approx() == (0.5, 0.5, 0.5)
    x, y, z, w = p.exact_homo()
    assert mpq_to_fraction(x / w) == ref[0]
    assert K.compare_on_axis(p, (0.5, 0.5, 0.5), 0) == 0
    assert K.points_equal(p, ExplicitPoint3(0.5, 0.5, 0.5))


def test_tpi_of_three_axis_planes(backend):
    tx = (0.25, 0, 0, 0.25, 1, 0, 0.25, 0, 1)
    ty = (0, 0.125, 0, 1, 0.125, 0, 0, 0.125, 1)
    tz = (0, 0, 0.75, 1, 0, 0.75, 0, 1, 0.75)
    p = ImplicitPointTPI(tx, ty, tz)
    ref = oracle.three_planes_point(tx, ty, tz)
    assert ref == (F(1, 4), F(1, 8), F(3, 4))
    assert p.approx() == (0.25, 0.125, 0.75)
    x, y, z, w = p.exact_homo()
    assert mpq_to_fraction(y / w) == ref[1]


def test_invalid_implicit_points_raise(backend):
    # line parallel to the plane
    p = ImplicitPointLPI((0, 0, 1), (1, 0, 1), (0, 0, 0), (1, 0, 0), (0, 1, 0))
    with pytest.raises(ValueError):
        p.exact_homo()
    # two parallel planes
    t1 = (0, 0, 0, 1, 0, 0, 0, 1, 0)
    t2 = (0, 0, 1, 1, 0, 1, 0, 1, 1)
    t3 = (0, 0, 0, 0, 1, 0, 0, 0, 1)
    q = ImplicitPointTPI(t1, t2, t3)
    with pytest.raises(ValueError):
        q.exact_homo()


def test_point_in_triangle_2d_cases(backend):
    a, b, c = (0, 0, 7), (4, 0, -2), (0, 4, 1)  # z is dropped
    assert K.point_in_triangle_2d((1, 1, 0), a, b, c, "z") == PointLocation.INSIDE
    assert K.point_in_triangle_2d((2, 0, 9), a, b, c, "z") == PointLocation.ON_BOUNDARY
    assert K.point_in_triangle_2d((0, 0, -1), a, b, c, "z") == PointLocation.ON_BOUNDARY
    assert K.point_in_triangle_2d((4, 4, 0), a, b, c, "z") == PointLocation.OUTSIDE
    assert K.point_in_triangle_2d((-0.1, 2, 0), a, b, c, "z") == PointLocation.OUTSIDE
    # clockwise winding must classify identically
    assert K.point_in_triangle_2d((1, 1, 0), c, b, a, "z") == PointLocation.INSIDE


def test_compare_on_axis_explicit(backend):
    assert K.compare_on_axis((1, 5, 0), (2, -1, 0), "x") == Sign.NEGATIVE
    assert K.compare_on_axis((1, 5, 0), (1, -1, 0), 0) == Sign.ZERO
    assert K.compare_on_axis((1, 5, 0), (1, -1, 0), "y") == Sign.POSITIVE


# ---------------------------------------------------------------------------
# randomized agreement with the rational oracle


def _rand_point(rng, scale=1.0):
    return tuple(rng.uniform(-scale, scale) for _ in range(3))


def _lattice_point(rng, n=4):
    return tuple(float(rng.randint(-n, n)) for _ in range(3))


def _near_coplanar_quad(rng):
    """a, b, c random; p on their plane, then nudged k ulps along a normal-ish
    direction (k may be 0, leaving p exactly coplanar in double arithmetic)."""
    a = _rand_point(rng)
    b = _rand_point(rng)
    c = _rand_point(rng)
    u = rng.random()
    v = rng.random() * (1 - u)
    p = tuple(
        a[i] + u * (b[i] - a[i]) + v * (c[i] - a[i]) for i in range(3)
    )
    k = rng.choice([0, 0, 1, -1, 2, -2, 8, -8])
    axis = rng.randrange(3)
    p = list(p)
    for _ in range(abs(k)):
        p[axis] = math.nextafter(p[axis], math.copysign(math.inf, k))
    return a, b, c, tuple(p)


def test_orient3d_matches_oracle_random(backend):
    rng = random.Random(20260815)
    for i in range(800):
        if i % 3 == 0:
            quad = [_lattice_point(rng) for _ in range(4)]
        elif i % 3 == 1:
            quad = [_rand_point(rng, 10.0 ** rng.randint(-3, 3)) for _ in range(4)]
        else:
            quad = list(_near_coplanar_quad(rng))
        got = K.orient3d(*quad)
        assert got == oracle.orient3d(*quad), quad


def test_orient3d_cached_equals_plain_everywhere(backend):
    rng = random.Random(77)
    for i in range(600):
        if i % 2:
            a, b, c, p = _near_coplanar_quad(rng)
        else:
            a, b, c, p = (_lattice_point(rng, 3) for _ in range(4))
        cache = K.make_plane_cache(a, b, c)
        assert K.orient3d_cached(cache, p) == K.orient3d(a, b, c, p), (a, b, c, p)


def test_orient2d_projected_matches_oracle(backend):
    rng = random.Random(4242)
    kept = {0: (1, 2), 1: (0, 2), 2: (0, 1)}
    for i in range(600):
        pts = [
            _lattice_point(rng) if i % 2 else _rand_point(rng) for _ in range(3)
        ]
        axis = rng.randrange(3)
        u, v = kept[axis]
        want = oracle.orient2d(
            (pts[0][u], pts[0][v]), (pts[1][u], pts[1][v]), (pts[2][u], pts[2][v])
        )
        assert K.orient2d_projected(*pts, axis) == want


def _random_lpi(rng):
    """A random certified line/plane crossing plus its oracle point."""
    while True:
        p, q = _rand_point(rng), _rand_point(rng)
        r, s, t = _rand_point(rng), _rand_point(rng), _rand_point(rng)
        ref = oracle.line_plane_point(p, q, r, s, t)
        if ref is not None:
            return ImplicitPointLPI(p, q, r, s, t), ref


def _random_tpi(rng):
    while True:
        t1 = tuple(v for pt in (_rand_point(rng) for _ in range(3)) for v in pt)
        t2 = tuple(v for pt in (_rand_point(rng) for _ in range(3)) for v in pt)
        t3 = tuple(v for pt in (_rand_point(rng) for _ in range(3)) for v in pt)
        ref = oracle.three_planes_point(t1, t2, t3)
        if ref is not None:
            return ImplicitPointTPI(t1, t2, t3), ref


def test_implicit_exact_coords_match_oracle(backend):
    rng = random.Random(99)
    for _ in range(60):
        pt, ref = _random_lpi(rng)
        x, y, z, w = pt.exact_homo()
        assert tuple(mpq_to_fraction(c / w) for c in (x, y, z)) == ref
        ih = pt.interval_homo()
        for j, c in enumerate((x, y, z, w)):
            assert F(ih[2 * j]) <= mpq_to_fraction(c) <= F(ih[2 * j + 1])
    for _ in range(40):
        pt, ref = _random_tpi(rng)
        x, y, z, w = pt.exact_homo()
        assert tuple(mpq_to_fraction(c / w) for c in (x, y, z)) == ref
        ih = pt.interval_homo()
        for j, c in enumerate((x, y, z, w)):
            assert F(ih[2 * j]) <= mpq_to_fraction(c) <= F(ih[2 * j + 1])


def test_approximate_is_correctly_rounded(backend):
    rng = random.Random(12)
    for _ in range(50):
        pt, ref = _random_lpi(rng)
        got = pt.approx()
        want = tuple(oracle.nearest_double(c) for c in ref)
        assert got == want


def test_generic_orient3d_matches_oracle(backend):
    rng = random.Random(31337)
    for _ in range(120):
        pt, ref = _random_lpi(rng)
        a, b, c = (_rand_point(rng) for _ in range(3))
        want = oracle.orient3d(a, b, c, ref)
        assert K.orient3d_generic(a, b, c, pt) == want
        # and against a cached plane
        cache = K.make_plane_cache(a, b, c)
        assert K.orient3d_plane(cache, pt) == want


def test_generic_orient3d_exact_zero(backend):
    # an LPI lying exactly on a query plane must report Zero
    pt = ImplicitPointLPI((0, 0, 0), (1, 1, 1), (0, 0, 0.5), (1, 0, 0.5), (0, 1, 0.5))
    a, b, c = (0, 0.5, 0), (1, 0.5, 0), (0, 0.5, 1)  # plane y = 0.5
    assert K.orient3d_generic(a, b, c, pt) == Sign.ZERO
    cache = K.make_plane_cache(a, b, c)
    assert K.orient3d_plane(cache, pt) == Sign.ZERO


def test_generic_compare_and_projection(backend):
    rng = random.Random(5150)
    for _ in range(80):
        p1, ref1 = _random_lpi(rng)
        p2, ref2 = _random_lpi(rng)
        for axis in range(3):
            want = (ref1[axis] > ref2[axis]) - (ref1[axis] < ref2[axis])
            assert K.compare_on_axis(p1, p2, axis) == want
        e = _rand_point(rng)
        fe = oracle.fr(e)
        for axis, (u, v) in enumerate([(1, 2), (0, 2), (0, 1)]):
            want = oracle.orient2d(
                (ref1[u], ref1[v]), (ref2[u], ref2[v]), (fe[u], fe[v])
            )
            assert K.orient2d_projected(p1, p2, e, axis) == want


def test_rational_point_predicates(backend):
    from meshbool.exactnum import rational as Q

    p = RationalPoint(Q(1, 3), Q(2, 3), Q(1, 7))
    assert K.compare_on_axis(p, (0.3333333333333333, 0, 0), 0) == Sign.POSITIVE
    assert K.compare_on_axis(p, (0.34, 0, 0), 0) == Sign.NEGATIVE
    want = oracle.orient3d((0, 0, 0), (1, 0, 0), (0, 1, 0), (F(1, 3), F(2, 3), F(1, 7)))
    assert K.orient3d_generic((0, 0, 0), (1, 0, 0), (0, 1, 0), p) == want


# ---------------------------------------------------------------------------
# filter soundness: a certified stage-1 sign is never wrong


def test_filter_soundness_adversarial(backend):
    from meshbool.kernel import _backend as B

    rng = random.Random(8080)
    wrong = 0
    for _ in range(4000):
        a, b, c, p = _near_coplanar_quad(rng)
        s = B.orient3d_filter(*a, *b, *c, *p)
        if s != 2:
            wrong += s != oracle.orient3d(a, b, c, p)
        minors = B.plane_minors(*a, *b, *c)
        s = B.orient3d_cached_filter(*p, *minors)
        if s != 2:
            wrong += s != oracle.orient3d(a, b, c, p)
    assert wrong == 0


def test_interval_stage_soundness(backend):
    from meshbool.kernel import _backend as B

    rng = random.Random(9090)
    for _ in range(2000):
        a, b, c, p = _near_coplanar_quad(rng)
        s = B.orient3d_interval(*a, *b, *c, *p)
        if s != 2:
            assert s == oracle.orient3d(a, b, c, p)


def test_stats_move_through_stages(backend):
    K.stats.reset()
    K.orient3d((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert K.stats.filter == 1
    # a tilted nearly-coplanar quadruple the static filter cannot certify
    a, b, c = (0.1, 0.2, 0.3), (1.1, 0.15, 0.4), (0.2, 1.3, 0.5)
    p = tuple(a[i] + 0.37 * (b[i] - a[i]) + 0.41 * (c[i] - a[i]) for i in range(3))
    K.orient3d(a, b, c, p)
    snap = K.stats.snapshot()
    assert snap["exact"] >= 1 or snap["interval"] >= 1
