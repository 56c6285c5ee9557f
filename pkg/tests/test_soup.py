"""Input preprocessing tests: exact dedup, degeneracy removal, validation."""

import numpy as np
import pytest

from meshbool.errors import EmptyInput, InvalidInput
from meshbool.soup import TriangleSoup, preprocess


def soup_of(vertices, triangles, labels=None, n_inputs=1):
    v = np.asarray(vertices, float)
    f = np.asarray(triangles, np.int64)
    lab = np.zeros(len(f), np.int64) if labels is None else np.asarray(labels)
    return TriangleSoup(v, f, lab, n_inputs)


def test_bitwise_vertex_dedup_across_meshes():
    a = ([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [[0, 1, 2]])
    b = ([(1, 0, 0), (0, 1, 0), (1, 1, 0)], [[0, 1, 2]])
    out, stats = preprocess(TriangleSoup.from_meshes([a, b]))
    assert stats.merged_vertices == 2
    assert out.n_vertices == 4
    assert out.n_triangles == 2
    # the shared edge references the same vertex ids in both triangles
    shared = set(out.triangles[0]) & set(out.triangles[1])
    assert len(shared) == 2


def test_negative_zero_merges_with_positive_zero():
    out, stats = preprocess(
        soup_of(
            [(0.0, 0.0, 0.0), (-0.0, 0.0, -0.0), (1, 0, 0), (0, 1, 0)],
            [[0, 2, 3], [1, 3, 2]],
        )
    )
    assert stats.merged_vertices == 1
    assert out.n_vertices == 3


def test_dedup_preserves_winding():
    tri = [(0, 0, 0), (2, 0, 0), (0, 2, 0)]
    out, _ = preprocess(soup_of(tri + tri, [[3, 4, 5]]))
    a, b, c = out.vertices[out.triangles[0]]
    n = np.cross(b - a, c - a)
    assert n[2] > 0


def test_index_degenerate_triangles_removed():
    out, stats = preprocess(
        soup_of(
            [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
            [[0, 1, 2], [0, 0, 2], [1, 1, 1]],
        )
    )
    assert stats.degenerate_triangles == 2
    assert out.n_triangles == 1


def test_exactly_collinear_triangle_removed(backend):
    # collinear along a skewed line: the float filter is inconclusive and the
    # exact kernel decides
    out, stats = preprocess(
        soup_of(
            [(0, 0, 0), (1, 1, 1), (2, 2, 2), (0, 3, 0), (3, 0, 0)],
            [[0, 1, 2], [0, 3, 4]],
        )
    )
    assert stats.degenerate_triangles == 1
    assert out.n_triangles == 1


def test_nearly_degenerate_triangle_kept(backend):
    # thin but exactly nonzero: one ulp off the diagonal must survive
    tip = np.nextafter(2.0, 3.0)
    out, stats = preprocess(
        soup_of([(0, 0, 0), (1, 1, 1), (2, 2, tip)], [[0, 1, 2]])
    )
    assert stats.degenerate_triangles == 0
    assert out.n_triangles == 1


def test_same_mesh_duplicates_removed_with_warning():
    out, stats = preprocess(
        soup_of(
            [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
            [[0, 1, 2], [1, 2, 0], [2, 0, 1]],
        )
    )
    assert stats.duplicate_triangles == 2
    assert out.n_triangles == 1
    assert stats.warnings


def test_cross_mesh_duplicates_kept():
    tri = ([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [[0, 1, 2]])
    out, stats = preprocess(TriangleSoup.from_meshes([tri, tri]))
    assert stats.duplicate_triangles == 0
    assert out.n_triangles == 2  # the arrangement merges them, not preprocess


def test_unreferenced_vertices_dropped():
    out, _ = preprocess(
        soup_of(
            [(9, 9, 9), (0, 0, 0), (1, 0, 0), (0, 1, 0), (5, 5, 5)],
            [[1, 2, 3]],
        )
    )
    assert out.n_vertices == 3
    assert set(map(tuple, out.vertices)) == {
        (0, 0, 0),
        (1, 0, 0),
        (0, 1, 0),
    }


def test_non_finite_coordinates_rejected():
    with pytest.raises(InvalidInput):
        preprocess(
            soup_of([(0, 0, 0), (1, 0, 0), (0, np.nan, 0)], [[0, 1, 2]])
        )
    with pytest.raises(InvalidInput):
        preprocess(
            soup_of([(0, 0, 0), (np.inf, 0, 0), (0, 1, 0)], [[0, 1, 2]])
        )


def test_out_of_range_indices_rejected():
    with pytest.raises(InvalidInput):
        preprocess(soup_of([(0, 0, 0), (1, 0, 0)], [[0, 1, 2]]))
    with pytest.raises(InvalidInput):
        preprocess(
            soup_of([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [[0, -1, 2]])
        )


def test_empty_inputs_rejected():
    with pytest.raises(EmptyInput):
        TriangleSoup.from_meshes([])
    with pytest.raises(EmptyInput):
        preprocess(
            soup_of([(0, 0, 0), (1, 1, 1), (2, 2, 2)], [[0, 1, 2]])
        )  # its only triangle is degenerate


def test_aabbs_and_scene_box():
    out, _ = preprocess(
        soup_of([(0, 0, 0), (4, 0, 0), (0, 2, 8)], [[0, 1, 2]])
    )
    assert out.aabbs().tolist() == [[0, 0, 0, 4, 2, 8]]
    assert out.scene_box().tolist() == [0, 0, 0, 4, 2, 8]
