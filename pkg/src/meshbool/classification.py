"""Inside/outside classification of arrangement patches.

A patch is a maximal set of arranged triangles connected across unflagged
edges.  Unflagged edges always join exactly two triangles with identical
mesh-membership and flip bits, so a patch is homogeneous in both, and the
intersection curve (the flagged edges) is exactly where the arrangement
crosses another mesh's surface — which means a whole patch lies strictly
inside or strictly outside every mesh it is not itself part of.

One ray per patch decides those sides, cast against every non-member mesh
whose bounding box overlaps the patch's.  The ray origin comes from a
cascade over the patch's triangles in ascending id order: the float
barycenter of a triangle is verified by an exact 2D point-in-triangle
test to pierce that triangle strictly inside, then pushed one scene
extent backwards along the ray axis (tier a: first triangle, b: second,
c: later ones).  When no triangle verifies, an exact rational interior
point of the first triangle is used instead and the whole cast runs on
rational arithmetic (tier d).

Classification is first-hit: crossings with each candidate mesh are
ordered exactly along the axis, crossings not strictly after the ray's
own verified patch crossing are dropped, and the patch is inside a mesh
exactly when the nearest remaining crossing leaves it (the ray origin is
on the positive side of the crossed plane).  A cast that would graze a
vertex or edge, or meet a triangle lying in a plane through the ray, is
degenerate: the far endpoint is then displaced by whole float steps,
alternating between the two non-axis coordinates with a growing step
count, and the sweep reruns with full 3D segment-triangle tests.  After
a fixed budget of perturbations the patch escalates to the rational
tier, which retries from fresh interior emanation points — weights
(1, j, j^2) on the seed corners, so no line in the seed plane can spoil
more than two of them — until a clean cast exists.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernel
from .errors import InvariantViolation
from .exactnum import rational as _Q
from .exactnum import sign_of
from .kernel import ImplicitPointLPI, PointLocation, RationalPoint

_KEPT = ((1, 2), (0, 2), (0, 1))
# sign(normal[k]) = _MINOR_TO_NORMAL[k] * sign(plane minor[k])
_MINOR_TO_NORMAL = (1, -1, 1)
_HALF_ULP = 2.0**-53
PERTURBATION_BUDGET = 64


class ClassificationStats:
    __slots__ = (
        "patches",
        "rays",
        "candidates",
        "tier_a",
        "tier_b",
        "tier_c",
        "tier_d",
        "perturbations",
        "seconds",
    )

    def __init__(self):
        for name in self.__slots__:
            setattr(self, name, 0)

    def merge(self, other):
        for name in self.__slots__:
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def snapshot(self):
        return {name: getattr(self, name) for name in self.__slots__}


class PatchRay:
    """Axis-aligned classification ray with a float origin.

    `origin` sits one scene extent below the patch along `axis`; `far`
    two extents above the origin, beyond the whole scene.  `row` is the
    arranged triangle the ray provably crosses strictly inside (the
    emanation context: crossings not strictly after that one are
    dropped).  `tier` records which cascade step produced the origin:
    0 = first patch triangle, 1 = second, 2 = any later one."""

    __slots__ = ("origin", "far", "axis", "row", "tier")

    def __init__(self, origin, far, axis, row, tier):
        self.origin = origin
        self.far = far
        self.axis = axis
        self.row = row
        self.tier = tier


class ExactRay:
    """Rational-origin fallback ray (cascade tier 3): emanates from exact
    interior points of the patch's seed triangle, cast on rational
    arithmetic only."""

    __slots__ = ("a", "b", "c", "axis", "row")

    def __init__(self, a, b, c, axis, row):
        self.a = a
        self.b = b
        self.c = c
        self.axis = axis
        self.row = row

    tier = 3


def extract_patches(arr):
    """Patch id per arranged triangle, numbered by first appearance.

    Connected components across unflagged edges; the edge table guarantees
    an unflagged edge joins exactly two triangles with equal labels and
    flips, so patches are homogeneous in both."""
    m = arr.n_triangles
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in arr.edge_tris[~arr.edge_flagged].tolist():
        ra, rb = find(a), find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    out = np.empty(m, np.int64)
    ids = {}
    for k in range(m):
        r = find(k)
        pid = ids.get(r)
        if pid is None:
            pid = ids[r] = len(ids)
        out[k] = pid
    return out


def _exact_coords(p):
    x, y, z, w = p.exact_homo()
    return (x / w, y / w, z / w)


def _ray_axis(a, b, c, preferred):
    """Axis with an exactly nonzero seed-normal component, preferring the
    requested one so the ray leaves the seed plane transversally."""
    e1 = tuple(b[i] - a[i] for i in range(3))
    e2 = tuple(c[i] - a[i] for i in range(3))
    n = (
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    )
    if n[preferred] != 0:
        return preferred
    order = sorted(range(3), key=lambda k: (-abs(float(n[k])), k))
    for k in order:
        if n[k] != 0:
            return k
    raise InvariantViolation("degenerate seed triangle in classification")


def _emanation(a, b, c, j):
    """Interior point of triangle (a, b, c) with barycentric weights
    (1, j, j^2); distinct j never produce three collinear points."""
    den = _Q(1 + j + j * j)
    return RationalPoint(
        *((a[i] + j * b[i] + j * j * c[i]) / den for i in range(3))
    )


def _plane_cache(soup, caches, t):
    cache = caches.get(t)
    if cache is None:
        va, vb, vc = soup.triangles[t]
        cache = caches[t] = kernel.make_plane_cache(
            tuple(soup.vertices[va]),
            tuple(soup.vertices[vb]),
            tuple(soup.vertices[vc]),
        )
    return cache


def _normal_axis_sign(cache, axis):
    """Exact sign of the plane normal's component along `axis`."""
    minors = (cache.myz, cache.mxz, cache.mxy)
    errs = (cache.kyz, cache.kxz, cache.kxy)
    m = minors[axis]
    if abs(m) > errs[axis] * _HALF_ULP and not kernel.exact_forced():
        s = 1 if m > 0 else -1
    else:
        s = sign_of(cache.exact_minors()[axis])
    return s * _MINOR_TO_NORMAL[axis]


def _cache_axis(cache, preferred):
    """Ray axis for a cached plane: the preferred one when the normal has
    an exactly nonzero component there, else the largest usable one."""
    if _normal_axis_sign(cache, preferred) != 0:
        return preferred
    m = (cache.myz, cache.mxz, cache.mxy)
    order = sorted(range(3), key=lambda k: (-abs(m[k]), k))
    for k in order:
        if k != preferred and _normal_axis_sign(cache, k) != 0:
            return k
    raise InvariantViolation("degenerate seed triangle in classification")


def _on_segment_2d(origin, p, q, axis):
    """Is the origin's projection on the closed projected segment [p, q]?"""
    if kernel.orient2d_projected(p, q, origin, axis) != 0:
        return False
    u, v = _KEPT[axis]
    for k in (u, v):
        s1 = kernel.compare_on_axis(origin, p, k)
        s2 = kernel.compare_on_axis(origin, q, k)
        if s1 * s2 > 0:
            return False
    return True


def _target_bit(lanes_row, mesh):
    return (int(lanes_row[mesh >> 6]) >> (mesh & 63)) & 1


def define_ray(arr, caches, rows, preferred_axis, scene, stats):
    """Emanation cascade for one patch (triangle rows in ascending order).

    Walks the patch triangles: each one's float barycenter is verified by
    the exact 2D point-in-triangle test to pierce the triangle strictly
    inside along the axis; the first success becomes the ray origin,
    pushed one scene extent backwards.  The triangle index that succeeded
    sets the recorded tier (first / second / later).  When every triangle
    fails — slivers below float resolution — an exact rational ray is
    returned instead (tier d, total).  The ray axis is fixed by the first
    triangle's plane: the preferred axis unless the normal component
    there is exactly zero."""
    soup = arr.soup
    axis = None
    for nth, row in enumerate(rows):
        cache = _plane_cache(soup, caches, int(arr.parents[row]))
        if axis is None:
            axis = _cache_axis(cache, preferred_axis)
        if _normal_axis_sign(cache, axis) == 0:
            continue  # triangle parallel to the ray: nothing to verify
        pts = [arr.point_of(int(g)) for g in arr.triangles[row]]
        pa, pb, pc = (kernel.approximate(p) for p in pts)
        b = (
            (pa[0] + pb[0] + pc[0]) / 3.0,
            (pa[1] + pb[1] + pc[1]) / 3.0,
            (pa[2] + pb[2] + pc[2]) / 3.0,
        )
        if kernel.point_in_triangle_2d(b, *pts, axis) != PointLocation.INSIDE:
            continue
        ext = scene[3 + axis] - scene[axis]
        if not ext > 0.0:
            ext = max(scene[3 + k] - scene[k] for k in range(3)) or 1.0
        origin = list(b)
        origin[axis] = b[axis] - ext
        far = list(origin)
        far[axis] = origin[axis] + 2.0 * ext
        tier = 0 if nth == 0 else (1 if nth == 1 else 2)
        if tier == 0:
            stats.tier_a += 1
        elif tier == 1:
            stats.tier_b += 1
        else:
            stats.tier_c += 1
        return PatchRay(tuple(origin), tuple(far), axis, int(row), tier)

    stats.tier_d += 1
    row = int(rows[0])
    a, b, c = (
        _exact_coords(arr.point_of(int(g))) for g in arr.triangles[row]
    )
    return ExactRay(a, b, c, _ray_axis(a, b, c, preferred_axis), row)


def _perturbed_far(far, axis, attempt):
    """The attempt-th perturbation of the far endpoint: one non-axis
    coordinate moved by whole float steps, alternating coordinates and
    growing the step count every second attempt."""
    u, v = _KEPT[axis]
    coord = u if attempt % 2 else v
    steps = (attempt + 1) // 2
    p = list(far)
    x = p[coord]
    for _ in range(steps):
        x = kernel.next_after(x, math.inf)
    p[coord] = x
    return tuple(p)


def _column_box(ray, pad):
    """Query box for all triangles a (possibly perturbed) cast can touch:
    the axis-aligned column through the origin, on and above it, widened
    by `pad` to cover every perturbed segment's lateral drift."""
    u, v = _KEPT[ray.axis]
    lo = [0.0, 0.0, 0.0]
    hi = [0.0, 0.0, 0.0]
    lo[u], hi[u] = ray.origin[u] - pad, ray.origin[u] + pad
    lo[v], hi[v] = ray.origin[v] - pad, ray.origin[v] + pad
    lo[ray.axis], hi[ray.axis] = ray.origin[ray.axis], math.inf
    return lo + hi


def _drift_pad(ray):
    scale = max(abs(c) for c in ray.origin + ray.far) or 1.0
    return 4.0 * PERTURBATION_BUDGET * (math.nextafter(scale, math.inf) - scale)


class _FirstHit:
    """Per-mesh accumulator: nearest kept crossing and the kept count."""

    __slots__ = ("point", "side", "count")

    def __init__(self):
        self.point = None
        self.side = 0
        self.count = 0


def _finish(first_of, lanes, strict_parity):
    bits = np.zeros(lanes, np.uint64)
    one = np.uint64(1)
    for mesh, acc in first_of.items():
        inside = acc.side > 0
        if strict_parity and (acc.count & 1) != inside:
            raise InvariantViolation(
                "first-hit classification disagrees with crossing parity"
            )
        if inside:
            bits[mesh >> 6] |= one << np.uint64(mesh & 63)
    return bits


def _sweep_axis(soup, caches, parents, labels1, cand, ray, target_lanes,
                lanes, strict_parity):
    """One axis-aligned cast against every target mesh at once.

    Returns the inside-bitset, or None when any candidate is in degenerate
    position (vertex/edge graze, or a touched triangle lying in a plane
    through the ray), which asks the caller to perturb and retry."""
    axis = ray.axis
    origin = ray.origin
    own_cache = _plane_cache(soup, caches, int(parents[ray.row]))
    own = ImplicitPointLPI(origin, ray.far, own_cache.coords[0:3],
                           own_cache.coords[3:6], own_cache.coords[6:9])
    first_of = {}
    for t in cand:
        mesh = int(labels1[t])
        if not _target_bit(target_lanes, mesh):
            continue
        cache = _plane_cache(soup, caches, t)
        snk = _normal_axis_sign(cache, axis)
        pa = cache.coords[0:3]
        pb = cache.coords[3:6]
        pc = cache.coords[6:9]
        if snk == 0:
            # the triangle lies in a plane containing the ray direction: it
            # cannot be crossed transversally, but touching it is degenerate
            for e0, e1 in ((pa, pb), (pb, pc), (pc, pa)):
                if _on_segment_2d(origin, e0, e1, axis):
                    return None
            continue
        loc = kernel.point_in_triangle_2d(origin, pa, pb, pc, axis)
        if loc == PointLocation.OUTSIDE:
            continue
        if loc == PointLocation.ON_BOUNDARY:
            return None
        hit = ImplicitPointLPI(origin, ray.far, pa, pb, pc)
        after = kernel.compare_on_axis(hit, own, axis)
        if after == 0:
            raise InvariantViolation(
                "a mesh surface passes through a patch interior point"
            )
        if after < 0:
            continue
        acc = first_of.get(mesh)
        if acc is None:
            acc = first_of[mesh] = _FirstHit()
        acc.count += 1
        nearer = True
        if acc.point is not None:
            cmp = kernel.compare_on_axis(hit, acc.point, axis)
            if cmp == 0:
                raise InvariantViolation(
                    "two crossings of one mesh coincide on a "
                    "classification ray"
                )
            nearer = cmp < 0
        if nearer:
            acc.point = hit
            acc.side = int(kernel.orient3d_cached(cache, origin))
            if acc.side == 0:
                raise InvariantViolation(
                    "classification ray origin lies on a crossed plane"
                )
    return _finish(first_of, lanes, strict_parity)


def _sweep_segment(arr, soup, caches, parents, labels1, cand, ray, far,
                   target_lanes, lanes, strict_parity):
    """One perturbed cast: the segment origin→far is no longer axis
    aligned, so every candidate gets the full 3D crossing test — the ray
    crosses a triangle strictly inside when the three tetrahedra spanned
    by the segment and each triangle edge agree in sign.  The segment
    must also still pierce the ray's own patch triangle strictly inside,
    re-checked against its exact (possibly implicit) corners."""
    axis = ray.axis
    origin = ray.origin
    own_cache = _plane_cache(soup, caches, int(parents[ray.row]))
    s_o = int(kernel.orient3d_cached(own_cache, origin))
    s_f = int(kernel.orient3d_cached(own_cache, far))
    if s_o == 0 or s_f == 0 or s_o == s_f:
        return None
    own_pts = [arr.point_of(int(g)) for g in arr.triangles[ray.row]]
    sig = 0
    for a, b in ((0, 1), (1, 2), (2, 0)):
        s = int(kernel.orient3d_generic(origin, far, own_pts[a], own_pts[b]))
        if s == 0 or (sig and s != sig):
            return None  # the perturbed segment slid off the patch triangle
        sig = s
    own = ImplicitPointLPI(origin, far, own_cache.coords[0:3],
                           own_cache.coords[3:6], own_cache.coords[6:9])

    first_of = {}
    for t in cand:
        mesh = int(labels1[t])
        if not _target_bit(target_lanes, mesh):
            continue
        cache = _plane_cache(soup, caches, t)
        s1 = int(kernel.orient3d_cached(cache, origin))
        s2 = int(kernel.orient3d_cached(cache, far))
        if s1 == 0 and s2 == 0:
            return None  # segment inside the candidate's plane
        if s2 == 0:
            return None  # far endpoint exactly on the plane
        if s1 == 0:
            continue  # crossing at the origin: strictly before the patch
        if s1 == s2:
            continue  # plane not crossed within the segment
        pa = cache.coords[0:3]
        pb = cache.coords[3:6]
        pc = cache.coords[6:9]
        e1 = int(kernel.orient3d(origin, far, pa, pb))
        e2 = int(kernel.orient3d(origin, far, pb, pc))
        if e1 == 0 or e2 == 0:
            return None
        if e1 != e2:
            continue
        e3 = int(kernel.orient3d(origin, far, pc, pa))
        if e3 == 0:
            return None
        if e3 != e1:
            continue
        hit = ImplicitPointLPI(origin, far, pa, pb, pc)
        after = kernel.compare_on_axis(hit, own, axis)
        if after == 0:
            raise InvariantViolation(
                "a mesh surface passes through a patch interior point"
            )
        if after < 0:
            continue
        acc = first_of.get(mesh)
        if acc is None:
            acc = first_of[mesh] = _FirstHit()
        acc.count += 1
        nearer = True
        if acc.point is not None:
            cmp = kernel.compare_on_axis(hit, acc.point, axis)
            if cmp == 0:
                raise InvariantViolation(
                    "two crossings of one mesh coincide on a "
                    "classification ray"
                )
            nearer = cmp < 0
        if nearer:
            acc.point = hit
            acc.side = s1
    return _finish(first_of, lanes, strict_parity)


def _plane_eval_exact(cache, coords):
    """Exact rational value of the cached plane's incidence form at a
    rational point; positive on the same side orient3d_cached calls
    positive, zero exactly on the plane."""
    myz, mxz, mxy, mxyz = cache.exact_minors()
    x, y, z = coords
    return -myz * x + mxz * y - mxy * z + mxyz


def _cast_exact(soup, tree, caches, labels1, ray, target_lanes, lanes,
                strict_parity, stats):
    """Rational-tier cast: the origin lies exactly on the patch, so the
    emanation context is the origin itself and crossings are kept when
    strictly after it along the axis.  Crossing parameters are compared
    as exact rationals.  Degenerate touches move to the next emanation
    point; the moment-curve argument bounds how many can fail."""
    axis = ray.axis
    u, v = _KEPT[axis]
    ax = tuple(float(x) for x in ray.a)
    bx = tuple(float(x) for x in ray.b)
    cx = tuple(float(x) for x in ray.c)
    scale = max(abs(c) for c in ax + bx + cx) or 1.0
    pad = 4.0 * (math.nextafter(scale, math.inf) - scale)
    lo = [0.0, 0.0, 0.0]
    hi = [0.0, 0.0, 0.0]
    for k in (u, v):
        lo[k] = min(ax[k], bx[k], cx[k]) - pad
        hi[k] = max(ax[k], bx[k], cx[k]) + pad
    lo[axis] = min(ax[axis], bx[axis], cx[axis]) - pad
    hi[axis] = math.inf
    cand = tree.query_box(lo + hi).tolist()
    stats.candidates += len(cand)

    limit = 8 * soup.n_triangles + 64
    for j in range(1, limit + 1):
        origin = _emanation(ray.a, ray.b, ray.c, j)
        first_of = {}
        clean = True
        for t in cand:
            mesh = int(labels1[t])
            if not _target_bit(target_lanes, mesh):
                continue
            cache = _plane_cache(soup, caches, t)
            snk = _normal_axis_sign(cache, axis)
            pa = cache.coords[0:3]
            pb = cache.coords[3:6]
            pc = cache.coords[6:9]
            if snk == 0:
                clean = not any(
                    _on_segment_2d(origin, e0, e1, axis)
                    for e0, e1 in ((pa, pb), (pb, pc), (pc, pa))
                )
                if not clean:
                    break
                continue
            loc = kernel.point_in_triangle_2d(origin, pa, pb, pc, axis)
            if loc == PointLocation.OUTSIDE:
                continue
            if loc == PointLocation.ON_BOUNDARY:
                clean = False
                break
            f = _plane_eval_exact(cache, origin.coords)
            if f == 0:
                raise InvariantViolation(
                    "a mesh surface passes through a patch interior point"
                )
            minors = cache.exact_minors()
            # d(plane form)/d(axis coordinate): the geometric normal component
            g = (-minors[0], minors[1], -minors[2])[axis]
            tpar = -f / g
            if not tpar > 0:
                continue
            acc = first_of.get(mesh)
            if acc is None:
                acc = first_of[mesh] = _FirstHit()
                acc.point = tpar
                acc.side = sign_of(f)
            else:
                if tpar == acc.point:
                    raise InvariantViolation(
                        "two mesh surfaces cross a classification ray at "
                        "one point"
                    )
                if tpar < acc.point:
                    acc.point = tpar
                    acc.side = sign_of(f)
            acc.count += 1
        if clean:
            return _finish(first_of, lanes, strict_parity)
        stats.perturbations += 1
    raise InvariantViolation("no clean classification ray found")


def classify_patches(arr, tree, axis=2, threads=1, stats=None,
                     strict_parity=False, force_rational=False):
    """Classify every patch against every mesh it is not part of.

    Returns (patch_of, inside): patch id per arranged triangle, and one
    uint64 lane bitset per patch whose bit m is set exactly when the patch
    lies strictly inside input mesh m.  Bits of member meshes are zero,
    as are bits of meshes whose bounding box misses the patch's — one ray
    is cast per (patch, overlapping non-member mesh) pair and the rays
    counter records exactly that number.

    `strict_parity` additionally checks, per cast, that the crossing
    count past the emanation point has the parity the first-hit verdict
    implies (valid only when the inputs are watertight).
    `force_rational` skips the float-origin cascade so every ray uses the
    exact rational tier; results are identical by construction, which is
    what cascade audits assert."""
    if stats is None:
        stats = ClassificationStats()
    t0 = time.perf_counter()

    soup = arr.soup
    axis = kernel._axis_index(axis)
    patch_of = extract_patches(arr)
    npatch = int(patch_of.max()) + 1 if len(patch_of) else 0
    stats.patches += npatch
    if npatch == 0:
        stats.seconds += time.perf_counter() - t0
        return patch_of, np.zeros((0, arr.lanes), np.uint64)

    order = np.argsort(patch_of, kind="stable")
    sorted_pids = patch_of[order]
    starts = np.searchsorted(sorted_pids, np.arange(npatch))
    ends = np.searchsorted(sorted_pids, np.arange(npatch), side="right")

    # conservative patch boxes from rounded coordinates (implicit points
    # round to within one float step of their exact position)
    tri_pts = arr.vertices[arr.triangles]
    tri_lo = tri_pts.min(axis=1)[order]
    tri_hi = tri_pts.max(axis=1)[order]
    patch_lo = np.nextafter(np.minimum.reduceat(tri_lo, starts), -np.inf)
    patch_lo = np.nextafter(patch_lo, -np.inf)
    patch_hi = np.nextafter(np.maximum.reduceat(tri_hi, starts), np.inf)
    patch_hi = np.nextafter(patch_hi, np.inf)

    mesh_lo = np.empty((soup.n_inputs, 3))
    mesh_hi = np.empty((soup.n_inputs, 3))
    for m in range(soup.n_inputs):
        pts = soup.vertices[np.unique(soup.triangles[soup.labels == m])]
        mesh_lo[m] = pts.min(axis=0)
        mesh_hi[m] = pts.max(axis=0)
    overlap = np.logical_and(
        (patch_lo[:, None, :] <= mesh_hi[None, :, :]).all(axis=2),
        (mesh_lo[None, :, :] <= patch_hi[:, None, :]).all(axis=2),
    )

    scene = soup.scene_box()
    labels1 = soup.labels
    parents = arr.parents
    caches = {}

    def one(p):
        local = ClassificationStats()
        rows = order[starts[p]:ends[p]]
        seed_labels = arr.labels[rows[0]]
        targets = [
            m for m in np.nonzero(overlap[p])[0].tolist()
            if not _target_bit(seed_labels, m)
        ]
        if not targets:
            return np.zeros(arr.lanes, np.uint64), local
        local.rays += len(targets)
        target_lanes = np.zeros(arr.lanes, np.uint64)
        one_ = np.uint64(1)
        for m in targets:
            target_lanes[m >> 6] |= one_ << np.uint64(m & 63)

        if force_rational:
            local.tier_d += 1
            a, b, c = (
                _exact_coords(arr.point_of(int(g)))
                for g in arr.triangles[int(rows[0])]
            )
            ray = ExactRay(a, b, c, _ray_axis(a, b, c, axis), int(rows[0]))
        else:
            ray = define_ray(arr, caches, rows, axis, scene, local)

        if isinstance(ray, ExactRay):
            bits = _cast_exact(soup, tree, caches, labels1, ray,
                               target_lanes, arr.lanes, strict_parity, local)
            return bits, local

        cand = tree.query_box(_column_box(ray, _drift_pad(ray)))
        local.candidates += len(cand)
        cand = cand.tolist()
        bits = _sweep_axis(soup, caches, parents, labels1, cand, ray,
                           target_lanes, arr.lanes, strict_parity)
        attempt = 0
        while bits is None and attempt < PERTURBATION_BUDGET:
            attempt += 1
            local.perturbations += 1
            far = _perturbed_far(ray.far, ray.axis, attempt)
            bits = _sweep_segment(arr, soup, caches, parents, labels1, cand,
                                  ray, far, target_lanes, arr.lanes,
                                  strict_parity)
        if bits is None:
            # the perturbation budget is a safety net; past it the exact
            # rational tier settles the patch
            local.tier_d += 1
            a, b, c = (
                _exact_coords(arr.point_of(int(g)))
                for g in arr.triangles[int(rows[0])]
            )
            exact = ExactRay(a, b, c, _ray_axis(a, b, c, axis), int(rows[0]))
            bits = _cast_exact(soup, tree, caches, labels1, exact,
                               target_lanes, arr.lanes, strict_parity, local)
        return bits, local

    if threads > 1 and npatch > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(npatch)))
    else:
        results = [one(p) for p in range(npatch)]

    rows = []
    for bits, local in results:
        rows.append(bits)
        stats.merge(local)
    inside = np.stack(rows) if rows else np.zeros((0, arr.lanes), np.uint64)

    stats.seconds += time.perf_counter() - t0
    return patch_of, inside
