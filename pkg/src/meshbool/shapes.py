"""Parametric test solids.

All generators return (vertices, triangles) with outward-facing
counterclockwise winding and enough shared float structure that exact
vertex dedup stitches faces together bitwise.
"""

from __future__ import annotations

import math

import numpy as np


def cube(n=1, size=1.0, center=(0.0, 0.0, 0.0)):
    """Axis-aligned cube, each face an n x n grid (12 n^2 triangles)."""
    cx, cy, cz = center
    h = size / 2.0
    lo = (cx - h, cy - h, cz - h)
    hi = (cx + h, cy + h, cz + h)
    # one shared coordinate ladder per axis so faces dedup exactly; the
    # endpoints must be bitwise lo/hi because faces pin their fixed axis
    # to those exact values
    ladders = []
    for a in range(3):
        lad = lo[a] + (hi[a] - lo[a]) * np.arange(n + 1) / n
        lad[0] = lo[a]
        lad[n] = hi[a]
        ladders.append(lad)

    verts = []
    tris = []

    def face(fixed_axis, fixed_val, ua, va, flip):
        base = len(verts)
        us, vs = ladders[ua], ladders[va]
        for j in range(n + 1):
            for i in range(n + 1):
                p = [0.0, 0.0, 0.0]
                p[fixed_axis] = fixed_val
                p[ua] = us[i]
                p[va] = vs[j]
                verts.append(p)
        for j in range(n):
            for i in range(n):
                v00 = base + j * (n + 1) + i
                v10 = v00 + 1
                v01 = v00 + (n + 1)
                v11 = v01 + 1
                if flip:
                    tris.append((v00, v01, v11))
                    tris.append((v00, v11, v10))
                else:
                    tris.append((v00, v10, v11))
                    tris.append((v00, v11, v01))

    face(2, lo[2], 0, 1, flip=True)   # -z
    face(2, hi[2], 0, 1, flip=False)  # +z
    face(1, lo[1], 0, 2, flip=False)  # -y
    face(1, hi[1], 0, 2, flip=True)   # +y
    face(0, lo[0], 1, 2, flip=True)   # -x
    face(0, hi[0], 1, 2, flip=False)  # +x
    return np.asarray(verts, float), np.asarray(tris, np.int64)


def uv_sphere(nu=24, nv=16, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Latitude/longitude sphere: 2*nu*(nv-1) triangles."""
    cx, cy, cz = center
    verts = [(cx, cy, cz + radius)]
    for j in range(1, nv):
        theta = math.pi * j / nv
        st, ct = math.sin(theta), math.cos(theta)
        for i in range(nu):
            phi = 2.0 * math.pi * i / nu
            verts.append(
                (
                    cx + radius * st * math.cos(phi),
                    cy + radius * st * math.sin(phi),
                    cz + radius * ct,
                )
            )
    verts.append((cx, cy, cz - radius))
    south = len(verts) - 1

    def ring(j):  # j in 1..nv-1
        return 1 + (j - 1) * nu

    tris = []
    for i in range(nu):
        i2 = (i + 1) % nu
        tris.append((0, ring(1) + i, ring(1) + i2))
    for j in range(1, nv - 1):
        for i in range(nu):
            i2 = (i + 1) % nu
            a, b = ring(j) + i, ring(j) + i2
            c, d = ring(j + 1) + i, ring(j + 1) + i2
            tris.append((a, c, d))
            tris.append((a, d, b))
    for i in range(nu):
        i2 = (i + 1) % nu
        tris.append((south, ring(nv - 1) + i2, ring(nv - 1) + i))
    return np.asarray(verts, float), np.asarray(tris, np.int64)


def torus(nu=32, nv=16, ring_radius=1.0, tube_radius=0.35, center=(0.0, 0.0, 0.0)):
    cx, cy, cz = center
    verts = []
    for i in range(nu):
        a = 2.0 * math.pi * i / nu
        ca, sa = math.cos(a), math.sin(a)
        for j in range(nv):
            b = 2.0 * math.pi * j / nv
            cb, sb = math.cos(b), math.sin(b)
            r = ring_radius + tube_radius * cb
            verts.append((cx + r * ca, cy + r * sa, cz + tube_radius * sb))
    tris = []
    for i in range(nu):
        i2 = (i + 1) % nu
        for j in range(nv):
            j2 = (j + 1) % nv
            a = i * nv + j
            b = i2 * nv + j
            c = i2 * nv + j2
            d = i * nv + j2
            tris.append((a, b, c))
            tris.append((a, c, d))
    return np.asarray(verts, float), np.asarray(tris, np.int64)


def thickened_disc(n=48, radius=1.0, height=0.25, center=(0.0, 0.0, 0.0)):
    """A squat cylinder: two triangle-fan caps and a quad side wall."""
    cx, cy, cz = center
    zt = cz + height / 2.0
    zb = cz - height / 2.0
    top = []
    bot = []
    for i in range(n):
        a = 2.0 * math.pi * i / n
        x = cx + radius * math.cos(a)
        y = cy + radius * math.sin(a)
        top.append((x, y, zt))
        bot.append((x, y, zb))
    verts = [(cx, cy, zt)] + top + [(cx, cy, zb)] + bot
    ct, cb = 0, n + 1
    t0, b0 = 1, n + 2
    tris = []
    for i in range(n):
        i2 = (i + 1) % n
        tris.append((ct, t0 + i, t0 + i2))
        tris.append((cb, b0 + i2, b0 + i))
        tris.append((t0 + i, b0 + i, b0 + i2))
        tris.append((t0 + i, b0 + i2, t0 + i2))
    return np.asarray(verts, float), np.asarray(tris, np.int64)


def rotation_matrix(axis, angle):
    x, y, z = np.asarray(axis, float) / np.linalg.norm(axis)
    c, s = math.cos(angle), math.sin(angle)
    C = 1 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


def random_pose(seed, max_translation=0.5):
    rng = np.random.default_rng(seed)
    axis = rng.normal(size=3)
    angle = rng.uniform(0, 2 * math.pi)
    R = rotation_matrix(axis, angle)
    t = rng.uniform(-max_translation, max_translation, 3)
    return R, t


def transformed(verts, R=None, t=None):
    v = np.asarray(verts, float)
    if R is not None:
        v = v @ np.asarray(R).T
    if t is not None:
        v = v + np.asarray(t)
    return v
