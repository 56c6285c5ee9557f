"""Boolean composition of a classified arrangement.

Every patch separates space locally into two sides: the side its stored
winding points away from ("minus", the interior side of meshes the patch
bounds with flip bit 0) and the side it points toward ("plus").  For each
side we know the full inside/outside bitset over all input meshes — member
meshes contribute their boundary orientation, non-members contribute the
ray-cast verdict, which is the same on both sides.  A patch belongs to the
result surface exactly when the requested operation's indicator function
disagrees between the two sides, and its output winding must point toward
the outside of the result.

Coincident geometry needs no special casing: the arrangement merges
coincident copies into a single row whose labels and flips record every
membership, and the two-sided indicator decides naturally whether the
shared wall survives (e.g. it does for a difference that bottoms out on a
face, and does not for a union of meshes glued along it).
"""

from __future__ import annotations

import time

from dataclasses import dataclass, field

import numpy as np

from .arrangement import arrange
from .classification import ClassificationStats, classify_patches
from .errors import InvalidInput
from . import kernel
from .report import RunReport
from .soup import TriangleSoup, _exact_degenerate_mask, preprocess

OPS = ("union", "intersection", "difference", "xor")


@dataclass
class BooleanResult:
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64
    provenance: np.ndarray  # (T, lanes) uint64 source-mesh bitsets
    report: RunReport = field(default_factory=RunReport)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


def _indicator(op, n_inputs):
    """Predicate on an inside-bitset (a Python int; bit m = inside mesh m)."""
    full = (1 << n_inputs) - 1
    if op == "union":
        return lambda bits: bits != 0
    if op == "intersection":
        return lambda bits: bits == full
    if op == "difference":
        rest = full & ~1
        return lambda bits: bits & 1 != 0 and bits & rest == 0
    if op == "xor":
        return lambda bits: bits.bit_count() & 1 == 1
    raise InvalidInput(f"unknown boolean operation {op!r}; expected one of {OPS}")


def _lanes_to_int(row):
    return int.from_bytes(np.ascontiguousarray(row, np.uint64).tobytes(), "little")


def select_patches(arr, patch_of, inside, op):
    """Evaluate the operation per patch.

    Returns (keep, flip): keep[p] is True when patch p lies on the result
    boundary, flip[p] when its stored winding must be reversed so the
    output normal points out of the result.
    """
    ind = _indicator(op, arr.soup.n_inputs)
    npatch = len(inside)
    keep = np.zeros(npatch, bool)
    flip = np.zeros(npatch, bool)
    if npatch == 0:
        return keep, flip
    _, seeds = np.unique(patch_of, return_index=True)
    for p in range(npatch):
        row = int(seeds[p])
        member = _lanes_to_int(arr.labels[row])
        flips = _lanes_to_int(arr.flips[row])
        strict = _lanes_to_int(inside[p])
        # minus side is interior to members stored un-flipped, plus side to
        # the flipped ones; strictly-inside verdicts hold on both sides
        in_minus = ind(strict | (member & ~flips))
        in_plus = ind(strict | (member & flips))
        keep[p] = in_minus != in_plus
        flip[p] = in_plus
    return keep, flip


def stitch(arr, patch_of, keep, flip):
    """Assemble the kept patches into a compact indexed mesh.

    Returns (vertices, triangles, provenance).  Vertex coordinates are the
    arrangement's vertex table (original doubles for explicit vertices,
    correctly rounded doubles for implicit intersection vertices) compacted
    to the used subset.
    """
    rows = keep[patch_of] if len(patch_of) else np.zeros(0, bool)
    tris = arr.triangles[rows].copy()
    provenance = arr.labels[rows].copy()
    flipped = flip[patch_of][rows] if len(patch_of) else np.zeros(0, bool)
    if flipped.any():
        tris[flipped] = tris[flipped][:, [0, 2, 1]]
    used, compact = np.unique(tris, return_inverse=True)
    vertices = arr.vertices[used] if len(used) else np.zeros((0, 3))
    triangles = compact.reshape(-1, 3).astype(np.int64)
    return vertices, triangles, provenance


def _directed_edges_matched(triangles, n_vertices):
    """True when every directed edge appears exactly as often as its
    reverse, i.e. the mesh is closed and consistently oriented."""
    if len(triangles) == 0:
        return True
    e = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    ).astype(np.int64)
    key = e[:, 0] * n_vertices + e[:, 1]
    rkey = e[:, 1] * n_vertices + e[:, 0]
    return np.array_equal(np.sort(key), np.sort(rkey))


def audit_output(vertices, triangles, warnings):
    """Post-rounding honesty checks.

    Implicit intersection vertices are exact rationals rounded once to the
    nearest double for output; rounding can collapse distinct vertices to
    the same coordinates or flatten a sliver to exact zero area.  Nothing
    is repaired — the counts are reported so consumers can decide.
    """
    out = {
        "vertices": int(len(vertices)),
        "triangles": int(len(triangles)),
        "closed": bool(_directed_edges_matched(triangles, max(len(vertices), 1))),
        "coincident_vertices": 0,
        "degenerate_after_rounding": 0,
        "signed_volume": 0.0,
    }
    if len(vertices):
        out["coincident_vertices"] = int(
            len(vertices) - len(np.unique(vertices, axis=0))
        )
    if len(triangles):
        out["degenerate_after_rounding"] = int(
            _exact_degenerate_mask(vertices, triangles).sum()
        )
        a, b, c = (vertices[triangles[:, k]] for k in range(3))
        out["signed_volume"] = float(
            np.einsum("ij,ij->i", a, np.cross(b - a, c - a)).sum() / 6.0
        )
    if out["coincident_vertices"]:
        warnings.append(
            f"{out['coincident_vertices']} output vertices share rounded "
            "coordinates with another vertex"
        )
    if out["degenerate_after_rounding"]:
        warnings.append(
            f"{out['degenerate_after_rounding']} output triangles have zero "
            "area after rounding"
        )
    if not out["closed"]:
        warnings.append(
            "output surface is not closed: some directed edge has no "
            "reverse, which means an input violated the closed-manifold "
            "contract"
        )
    return out


def compose(arr, patch_of, inside, op, report=None):
    """Select, orient, and stitch the result of one operation from an
    already classified arrangement.  Cheap relative to arrangement and
    classification, so interactive callers reuse those across op changes."""
    t0 = time.perf_counter()
    keep, flip = select_patches(arr, patch_of, inside, op)
    vertices, triangles, provenance = stitch(arr, patch_of, keep, flip)
    result = BooleanResult(vertices, triangles, provenance)
    rep = report if report is not None else result.report
    rep.op = op
    rep.booleans = {
        "patches": int(len(keep)),
        "patches_kept": int(keep.sum()),
        "patches_flipped": int((keep & flip).sum()),
        "rows_kept": int(len(triangles)),
    }
    rep.output = audit_output(vertices, triangles, rep.warnings)
    rep.timings["compose_seconds"] = time.perf_counter() - t0
    result.report = rep
    return result


def boolean(
    op,
    meshes,
    *,
    axis=2,
    threads=1,
    leaf_capacity=None,
    max_depth=None,
):
    """Evaluate one boolean operation over a list of (vertices, triangles)
    input meshes.  ``difference`` subtracts every later mesh from the first;
    the other operations are symmetric over all inputs.

    Returns a BooleanResult whose report covers every pipeline stage.
    """
    _indicator(op, 1)  # validate the name before doing any work
    report = RunReport(op=op)
    kernel_before = kernel.stats.snapshot()

    t0 = time.perf_counter()
    soup, pre = preprocess(TriangleSoup.from_meshes(meshes))
    report.n_inputs = soup.n_inputs
    report.preprocess = {
        "input_triangles": int(soup.n_triangles) + pre.degenerate_triangles
        + pre.duplicate_triangles,
        "triangles": int(soup.n_triangles),
        "vertices": int(soup.n_vertices),
        "merged_vertices": pre.merged_vertices,
        "degenerate_triangles": pre.degenerate_triangles,
        "duplicate_triangles": pre.duplicate_triangles,
    }
    report.warnings.extend(pre.warnings)
    report.timings["preprocess_seconds"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    arr, tree = arrange(
        soup, leaf_capacity=leaf_capacity, max_depth=max_depth, threads=threads
    )
    report.arrangement = arr.stats.snapshot()
    report.arrangement["triangles"] = int(len(arr.triangles))
    report.arrangement["vertices"] = int(len(arr.vertices))
    report.timings["arrange_seconds"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # crossing parity is a valid cross-check of first-hit classification
    # only when every input bounds a solid
    parity_check = all(
        _directed_edges_matched(
            soup.triangles[soup.labels == m], soup.n_vertices
        )
        for m in range(soup.n_inputs)
    )
    cls_stats = ClassificationStats()
    patch_of, inside = classify_patches(
        arr, tree, axis=axis, threads=threads, stats=cls_stats,
        strict_parity=parity_check
    )
    report.classification = cls_stats.snapshot()
    report.timings["classify_seconds"] = time.perf_counter() - t0

    result = compose(arr, patch_of, inside, op, report)
    after = kernel.stats.snapshot()
    report.kernel = {k: after[k] - kernel_before[k] for k in after}
    report.timings["total_seconds"] = sum(
        v for k, v in report.timings.items() if k.endswith("_seconds")
    )
    return result
