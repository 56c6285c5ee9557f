"""Octree over triangle bounding boxes.

The tree is built once per run and serves two access patterns: the
all-pairs candidate scan that seeds intersection detection, and vertical
column queries for axis-aligned classification rays.  Boxes that straddle
a split plane are stored in every overlapping child, so any pair of
triangles with overlapping AABBs is guaranteed to share at least one
leaf regardless of the subdivision; queries dedup on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel

DEFAULT_LEAF_CAPACITY = 32
DEFAULT_MAX_DEPTH = 10


@dataclass(frozen=True)
class AxisRay:
    """A ray along a coordinate axis: fixed in the two other coordinates,
    spanning [origin[axis], far] with direction +1/-1."""

    origin: tuple
    axis: int
    direction: int = 1
    far: float = np.inf


class Octree:
    def __init__(self, boxes, children, leaf_start, leaf_count, items, root_box):
        self.boxes = boxes
        self.children = children
        self.leaf_start = leaf_start
        self.leaf_count = leaf_count
        self.items = items
        self.root_box = root_box

    @classmethod
    def build(cls, aabbs, leaf_capacity=DEFAULT_LEAF_CAPACITY,
              max_depth=DEFAULT_MAX_DEPTH):
        aabbs = np.ascontiguousarray(aabbs, dtype=np.float64)
        if len(aabbs) == 0:
            root = np.zeros(6)
            return cls(
                np.zeros((1, 6)),
                np.full((1, 8), -1, np.int32),
                np.zeros(1, np.int64),
                np.zeros(1, np.int64),
                np.zeros(0, np.int64),
                root,
            )
        root_box = np.concatenate([aabbs[:, :3].min(0), aabbs[:, 3:].max(0)])
        if kernel.backend_name() == "native":
            from . import _native

            boxes, children, start, count, items = _native.octree_build(
                aabbs, root_box, int(leaf_capacity), int(max_depth)
            )
            return cls(boxes, children, start, count, items, root_box)
        return cls._build_python(aabbs, root_box, leaf_capacity, max_depth)

    @classmethod
    def _build_python(cls, aabbs, root_box, leaf_capacity, max_depth):
        boxes = [root_box.copy()]
        children = [np.full(8, -1, np.int32)]
        leaf_start = [-1]
        leaf_count = [0]
        flat_items = []
        flat_total = [0]

        def rec(node_id, idx, depth):
            if len(idx) <= leaf_capacity or depth >= max_depth:
                leaf_start[node_id] = flat_total[0]
                leaf_count[node_id] = len(idx)
                flat_items.append(idx)
                flat_total[0] += len(idx)
                return
            box = boxes[node_id]
            mid = 0.5 * (box[:3] + box[3:])
            sub = aabbs[idx]
            for ci in range(8):
                lo = np.where(
                    [ci & 1, ci & 2, ci & 4], mid, box[:3]
                )
                hi = np.where([ci & 1, ci & 2, ci & 4], box[3:], mid)
                mask = (
                    (sub[:, 0] <= hi[0]) & (sub[:, 3] >= lo[0])
                    & (sub[:, 1] <= hi[1]) & (sub[:, 4] >= lo[1])
                    & (sub[:, 2] <= hi[2]) & (sub[:, 5] >= lo[2])
                )
                child_idx = idx[mask]
                if len(child_idx) == 0:
                    continue
                child_id = len(boxes)
                children[node_id][ci] = child_id
                boxes.append(np.concatenate([lo, hi]))
                children.append(np.full(8, -1, np.int32))
                leaf_start.append(-1)
                leaf_count.append(0)
                rec(child_id, child_idx, depth + 1)

        rec(0, np.arange(len(aabbs), dtype=np.int64), 0)
        items = (
            np.concatenate(flat_items)
            if flat_items
            else np.zeros(0, np.int64)
        )
        return cls(
            np.asarray(boxes),
            np.asarray(children, np.int32),
            np.asarray(leaf_start, np.int64),
            np.asarray(leaf_count, np.int64),
            items,
            root_box,
        )

    @property
    def n_nodes(self):
        return len(self.boxes)

    def _collect(self, overlaps):
        """Gather items from leaves whose box satisfies `overlaps(box)`."""
        out = []
        stack = [0]
        while stack:
            n = stack.pop()
            if not overlaps(self.boxes[n]):
                continue
            if self.leaf_start[n] >= 0:
                s = self.leaf_start[n]
                out.append(self.items[s : s + self.leaf_count[n]])
            else:
                stack.extend(c for c in self.children[n] if c >= 0)
        if not out:
            return np.zeros(0, np.int64)
        return np.unique(np.concatenate(out))

    def query_box(self, box):
        """Triangle ids whose AABB may intersect the closed query box."""
        box = np.asarray(box, dtype=np.float64)

        def overlaps(b):
            return (
                b[0] <= box[3] and b[3] >= box[0]
                and b[1] <= box[4] and b[4] >= box[1]
                and b[2] <= box[5] and b[5] >= box[2]
            )

        return self._collect(overlaps)

    def column_items(self, ray: AxisRay):
        """Triangle ids in the axis-aligned column swept by a ray."""
        k = ray.axis
        u, v = ((1, 2), (0, 2), (0, 1))[k]
        pu, pv = ray.origin[u], ray.origin[v]
        lo = min(ray.origin[k], ray.far)
        hi = max(ray.origin[k], ray.far)

        def overlaps(b):
            return (
                b[u] <= pu <= b[u + 3]
                and b[v] <= pv <= b[v + 3]
                and b[k] <= hi
                and b[k + 3] >= lo
            )

        return self._collect(overlaps)

    def candidate_pairs(self, aabbs, labels, cross_only=True):
        """Unique (i, j), i < j, sharing a leaf with overlapping AABBs;
        cross_only skips same-mesh pairs."""
        aabbs = np.ascontiguousarray(aabbs, dtype=np.float64)
        labels = np.ascontiguousarray(labels, dtype=np.int64)
        if kernel.backend_name() == "native":
            from . import _native

            return _native.candidate_pairs(
                self.leaf_start, self.leaf_count, self.items, aabbs, labels,
                bool(cross_only),
            )
        keys = []
        T = len(aabbs)
        for n in range(self.n_nodes):
            c = self.leaf_count[n]
            if self.leaf_start[n] < 0 or c <= 1:
                continue
            ids = self.items[self.leaf_start[n] : self.leaf_start[n] + c]
            ii, jj = np.meshgrid(ids, ids, indexing="ij")
            mask = ii < jj
            if cross_only:
                mask &= labels[ii] != labels[jj]
            a = aabbs[ii[mask]]
            b = aabbs[jj[mask]]
            hit = (
                (a[:, 0] <= b[:, 3]) & (a[:, 3] >= b[:, 0])
                & (a[:, 1] <= b[:, 4]) & (a[:, 4] >= b[:, 1])
                & (a[:, 2] <= b[:, 5]) & (a[:, 5] >= b[:, 2])
            )
            keys.append(ii[mask][hit] * T + jj[mask][hit])
        if not keys:
            return np.zeros((0, 2), np.int64)
        uniq = np.unique(np.concatenate(keys))
        return np.stack([uniq // T, uniq % T], axis=1)


def triangle_aabbs(vertices, triangles):
    tri = vertices[triangles]
    return np.concatenate([tri.min(axis=1), tri.max(axis=1)], axis=1)
