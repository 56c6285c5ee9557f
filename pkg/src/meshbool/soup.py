"""Input triangle soup and its preprocessing.

Preprocessing is purely combinatorial-exact: bitwise vertex dedup, removal
of exactly degenerate triangles (zero area, decided by the kernel when the
vectorized filter cannot), and removal of duplicate triangles within the
same input mesh.  Nothing is perturbed and no coordinate changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .errors import EmptyInput, InvalidInput

_MINOR_K = 3.000000000000004 * 2.0**-53


class TriangleSoup:
    """A bag of labeled triangles from one or more input meshes."""

    def __init__(self, vertices, triangles, labels, n_inputs):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.n_inputs = int(n_inputs)

    @classmethod
    def from_meshes(cls, meshes):
        """meshes: iterable of (vertices, triangles) pairs."""
        verts = []
        tris = []
        labels = []
        offset = 0
        n = 0
        for label, (v, f) in enumerate(meshes):
            v = np.asarray(v, dtype=np.float64).reshape(-1, 3)
            f = np.asarray(f, dtype=np.int64).reshape(-1, 3)
            verts.append(v)
            tris.append(f + offset)
            labels.append(np.full(len(f), label, np.int64))
            offset += len(v)
            n += 1
        if n == 0:
            raise EmptyInput("no input meshes")
        return cls(
            np.concatenate(verts) if verts else np.zeros((0, 3)),
            np.concatenate(tris) if tris else np.zeros((0, 3), np.int64),
            np.concatenate(labels) if labels else np.zeros(0, np.int64),
            n,
        )

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def aabbs(self):
        tri = self.vertices[self.triangles]
        return np.concatenate([tri.min(axis=1), tri.max(axis=1)], axis=1)

    def scene_box(self):
        if self.n_vertices == 0:
            return np.zeros(6)
        return np.concatenate([self.vertices.min(0), self.vertices.max(0)])


@dataclass
class PreprocessStats:
    merged_vertices: int = 0
    degenerate_triangles: int = 0
    duplicate_triangles: int = 0
    warnings: list = field(default_factory=list)


def _exact_degenerate_mask(vertices, triangles):
    """Boolean mask of exactly zero-area triangles, resolved in bulk by a
    filtered cross product and per-triangle exactly where the filter is
    inconclusive."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    ab = b - a
    ac = c - a
    # each normal component is a 2x2 determinant t1*t2 - t3*t4
    comps = []
    certain_nonzero = np.zeros(len(triangles), bool)
    for (i, j) in ((1, 2), (2, 0), (0, 1)):
        t1t2 = ab[:, i] * ac[:, j]
        t3t4 = ab[:, j] * ac[:, i]
        det = t1t2 - t3t4
        err = _MINOR_K * (np.abs(t1t2) + np.abs(t3t4))
        certain_nonzero |= np.abs(det) > err
        comps.append((det, err))
    undecided = ~certain_nonzero
    degenerate = np.zeros(len(triangles), bool)
    for t in np.nonzero(undecided)[0]:
        pa, pb, pc = (tuple(vertices[triangles[t, k]]) for k in range(3))
        degenerate[t] = all(
            kernel.orient2d_projected(pa, pb, pc, axis) == 0 for axis in range(3)
        )
    return degenerate


def preprocess(soup: TriangleSoup):
    """Validate and canonicalize a soup; returns (soup, PreprocessStats)."""
    stats = PreprocessStats()
    v = soup.vertices
    f = soup.triangles
    if not np.isfinite(v).all():
        raise InvalidInput("non-finite vertex coordinates")
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise InvalidInput("triangle index out of range")

    v = v.copy()
    v[v == 0.0] = 0.0  # normalize -0.0 so bitwise dedup equals exact equality

    # bitwise vertex dedup
    order = np.lexsort((v[:, 2], v[:, 1], v[:, 0]))
    sv = v[order]
    keep = np.ones(len(v), bool)
    if len(v) > 1:
        same = np.all(sv[1:] == sv[:-1], axis=1)
        keep[1:] = ~same
    group = np.cumsum(keep) - 1  # dedup id per sorted position
    remap = np.empty(len(v), np.int64)
    remap[order] = group
    new_v = sv[keep]
    stats.merged_vertices = len(v) - len(new_v)
    f = remap[f]

    # index-degenerate triangles
    idx_ok = (
        (f[:, 0] != f[:, 1]) & (f[:, 1] != f[:, 2]) & (f[:, 0] != f[:, 2])
    )
    labels = soup.labels
    stats.degenerate_triangles += int((~idx_ok).sum())
    f = f[idx_ok]
    labels = labels[idx_ok]

    # geometrically degenerate triangles (exact zero area)
    if len(f):
        deg = _exact_degenerate_mask(new_v, f)
        stats.degenerate_triangles += int(deg.sum())
        f = f[~deg]
        labels = labels[~deg]

    # duplicate triangles within the same mesh (same vertex set)
    if len(f):
        key = np.sort(f, axis=1)
        order = np.lexsort((key[:, 2], key[:, 1], key[:, 0], labels))
        sk = key[order]
        sl = labels[order]
        dup = np.zeros(len(f), bool)
        same = np.all(sk[1:] == sk[:-1], axis=1) & (sl[1:] == sl[:-1])
        dup[order[1:][same]] = True
        stats.duplicate_triangles = int(dup.sum())
        if dup.any():
            stats.warnings.append(
                f"removed {int(dup.sum())} duplicate same-mesh triangles"
            )
        f = f[~dup]
        labels = labels[~dup]

    if len(f) == 0:
        raise EmptyInput("no usable triangles after preprocessing")

    # drop unreferenced vertices
    used = np.zeros(len(new_v), bool)
    used[f] = True
    vmap = np.cumsum(used) - 1
    out = TriangleSoup(new_v[used], vmap[f], labels, soup.n_inputs)
    return out, stats
