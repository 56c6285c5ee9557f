"""Patch classification tests.

Every patch's inside/outside verdict is re-derived independently: the exact
rational centroid of each arranged triangle is tested against each other
input mesh with the oracle's own crossing-parity routine (pure Fractions,
different ray, different containment formulation).
"""

from fractions import Fraction as F

import numpy as np
import pytest

import _rational_oracle as oracle
from meshbool.arrangement import arrange
from meshbool.classification import (
    ClassificationStats,
    cast_ray,
    classify_patches,
    extract_patches,
)
from meshbool.octree import Octree
from meshbool.shapes import cube, transformed, uv_sphere
from meshbool.soup import TriangleSoup, preprocess

DIRECTIONS = [
    (1, F(10007, 10009), F(9973, 10037)),
    (F(9973, 10007), 1, F(10009, 10037)),
    (F(3, 7), F(5, 11), 1),
]


def make_soup(*meshes):
    soup, _stats = preprocess(TriangleSoup.from_meshes(meshes))
    return soup


def classified(*meshes, **kw):
    soup = make_soup(*meshes)
    arr, tree = arrange(soup)
    patch_of, inside = classify_patches(arr, tree, **kw)
    return soup, arr, tree, patch_of, inside


def mesh_triangles(soup, mesh):
    rows = soup.triangles[soup.labels == mesh]
    return [
        tuple(tuple(map(float, soup.vertices[v])) for v in row)
        for row in rows
    ]


def oracle_inside(tris, point):
    for d in DIRECTIONS:
        try:
            return oracle.point_in_closed_mesh(point, tris, d)
        except ValueError:
            continue
    raise AssertionError("all oracle ray directions were degenerate")


def certify_classification(soup, arr, patch_of, inside):
    """Exact cross-check of every row against every non-member mesh."""
    tris_of = {m: mesh_triangles(soup, m) for m in range(soup.n_inputs)}
    for k in range(arr.n_triangles):
        pts = [
            oracle.rational_coords(arr.point_of(int(g)))
            for g in arr.triangles[k]
        ]
        centroid = tuple(
            (pts[0][i] + pts[1][i] + pts[2][i]) / 3 for i in range(3)
        )
        bits = int(inside[patch_of[k], 0])
        labels = int(arr.labels[k, 0])
        for mesh in range(soup.n_inputs):
            if (labels >> mesh) & 1:
                assert not (bits >> mesh) & 1, "member bit must stay zero"
                continue
            want = oracle_inside(tris_of[mesh], centroid)
            got = bool((bits >> mesh) & 1)
            assert got == want, (
                f"row {k} vs mesh {mesh}: engine {got}, oracle {want}"
            )


def patch_homogeneity(arr, patch_of):
    for p in range(int(patch_of.max()) + 1):
        rows = np.nonzero(patch_of == p)[0]
        assert np.all(arr.labels[rows] == arr.labels[rows[0]])
        assert np.all(arr.flips[rows] == arr.flips[rows[0]])


def test_transversal_cubes(backend):
    soup, arr, tree, patch_of, inside = classified(
        cube(1, 2.0, (1, 1, 1)), cube(1, 2.0, (2, 2, 2))
    )
    assert int(patch_of.max()) + 1 == 4  # each cube: inside part, outside part
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)


def test_coplanar_cubes(backend):
    soup, arr, tree, patch_of, inside = classified(
        cube(1, 2.0, (1, 1, 1)), cube(1, 2.0, (2, 2, 1))
    )
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)


def test_nested_cubes(backend):
    soup, arr, tree, patch_of, inside = classified(
        cube(1, 4.0, (0, 0, 0)), cube(1, 1.0, (0, 0, 0))
    )
    assert int(patch_of.max()) + 1 == 2
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)
    # the inner surface is inside the outer mesh, not vice versa
    inner_patch = patch_of[int(np.nonzero(arr.labels[:, 0] == 2)[0][0])]
    outer_patch = patch_of[int(np.nonzero(arr.labels[:, 0] == 1)[0][0])]
    assert int(inside[inner_patch, 0]) == 1
    assert int(inside[outer_patch, 0]) == 0


def test_sphere_cube_overlap(backend):
    soup, arr, tree, patch_of, inside = classified(
        cube(1, 2.0, (0, 0, 0)),
        (uv_sphere(nu=8, nv=5, radius=0.9, center=(0.8, 0.1, 0.2))),
    )
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)


def test_three_mesh_chain():
    soup, arr, tree, patch_of, inside = classified(
        cube(1, 2.0, (0, 0, 0)),
        cube(1, 2.0, (1.25, 0, 0)),
        cube(1, 2.0, (2.5, 0, 0)),
    )
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)


def test_axis_preference_does_not_change_the_answer():
    soup = make_soup(cube(1, 2.0, (1, 1, 1)), cube(1, 2.0, (2, 2, 2)))
    arr, tree = arrange(soup)
    results = [classify_patches(arr, tree, axis=k) for k in range(3)]
    for patch_of, inside in results[1:]:
        assert np.array_equal(patch_of, results[0][0])
        assert np.array_equal(inside, results[0][1])


def test_threaded_classification_is_deterministic():
    soup = make_soup(cube(2, 2.0, (1, 1, 1)), cube(2, 2.0, (2, 2, 2)))
    arr, tree = arrange(soup)
    base = classify_patches(arr, tree)
    threaded = classify_patches(arr, tree, threads=4)
    assert np.array_equal(base[0], threaded[0])
    assert np.array_equal(base[1], threaded[1])


def test_cast_ray_reports_grazing_as_degenerate(backend):
    # mesh 1 has a vertex exactly above the query origin
    soup = make_soup(
        ([(0, 0, 0), (3, 0, 0), (0, 3, 0)], [[0, 1, 2]]),
        ([(1, 1, 1), (2, 1, 1), (1, 2, 1)], [[0, 1, 2]]),
    )
    tree = Octree.build(soup.aabbs())
    stats = ClassificationStats()
    from meshbool.kernel import RationalPoint

    member = np.array([1], np.uint64)  # origin lies on mesh 0
    graze = cast_ray(
        soup, tree, {}, RationalPoint(F(1), F(1), F(0)), 2, member, 1, stats
    )
    assert graze is None
    clean = cast_ray(
        soup, tree, {}, RationalPoint(F(3, 2), F(5, 4), F(0)), 2, member, 1,
        stats,
    )
    assert clean is not None and int(clean[0]) == 2  # crosses mesh 1 once


def test_degenerate_first_ray_is_retried(backend):
    # the seed barycenter of the big triangle sits exactly under a vertex of
    # the small one, so the first cast grazes and a later one must land
    soup, arr, tree, patch_of, inside = classified(
        ([(0, 0, 0), (3, 0, 0), (0, 3, 0)], [[0, 1, 2]]),
        ([(1, 1, 1), (2, 1, 1), (1, 2, 1)], [[0, 1, 2]]),
    )
    stats = ClassificationStats()
    classify_patches(arr, tree, stats=stats)
    assert stats.retries >= 1
    assert inside.sum() == 0  # open sheets: both ray parities are even


def test_vertical_seed_plane_switches_axis(backend):
    # a patch living in a vertical plane cannot use the default +z ray
    soup, arr, tree, patch_of, inside = classified(
        ([(0, 0, 0), (0, 2, 0), (0, 1, 2)], [[0, 1, 2]]),
        cube(1, 4.0, (0, 0, 0)),
    )
    patch_homogeneity(arr, patch_of)
    certify_classification(soup, arr, patch_of, inside)
    # the vertical triangle is strictly inside the big cube
    tri_patch = patch_of[int(np.nonzero(arr.labels[:, 0] == 1)[0][0])]
    assert int(inside[tri_patch, 0]) == 2
