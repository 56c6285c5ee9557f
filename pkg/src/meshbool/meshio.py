"""Mesh file I/O: OBJ (canonical), OFF, and binary STL.

OBJ and OFF are written with 17 significant decimal digits, which is
enough to reproduce any binary64 value exactly, so save→load round-trips
preserve vertex bits and triangle order.  Binary STL stores float32 by
format definition; it round-trips bitwise only for float32-representable
coordinates.

``save`` also emits a sidecar label file next to the mesh (``<path>.labels``)
with one lowercase hex bitmask per line, line-aligned with the faces, when
the object carries per-triangle provenance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormat

_EXTENSIONS = {".obj": "OBJ", ".off": "OFF", ".stl": "STL"}


@dataclass
class MeshFile:
    format: str
    path: str
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def mesh(self):
        return self.vertices, self.triangles


def _format_of(path):
    ext = Path(path).suffix.lower()
    if ext not in _EXTENSIONS:
        raise UnsupportedFormat(f"unrecognized mesh extension {ext!r} ({path})")
    return _EXTENSIONS[ext]


def _finish(fmt, path, vertices, triangles):
    v = np.asarray(vertices, np.float64).reshape(-1, 3)
    f = np.asarray(triangles, np.int64).reshape(-1, 3)
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise ParseError(f"{path}: face index out of range")
    return MeshFile(fmt, str(path), v, f)


def _load_obj(path):
    vertices = []
    faces = []
    with open(path, "r", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad vertex coordinate") from None
            elif tag == "f":
                if len(parts) < 4:
                    raise ParseError(f"{path}:{lineno}: face needs at least 3 vertices")
                idx = []
                for token in parts[1:]:
                    ref = token.split("/")[0]
                    try:
                        i = int(ref)
                    except ValueError:
                        raise ParseError(f"{path}:{lineno}: bad face index {token!r}") from None
                    if i == 0:
                        raise ParseError(f"{path}:{lineno}: OBJ indices are 1-based")
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                for k in range(1, len(idx) - 1):  # fan for polygonal faces
                    faces.append([idx[0], idx[k], idx[k + 1]])
            # all other tags (vn, vt, usemtl, o, g, s, mtllib, l, p) are ignored
    return _finish("OBJ", path, vertices, faces)


def _load_off(path):
    with open(path, "r", errors="replace") as fh:
        lines = fh.readlines()
    body = [
        (n, ln.strip())
        for n, ln in enumerate(lines, 1)
        if ln.strip() and not ln.strip().startswith("#")
    ]
    if not body or body[0][1].split()[0] != "OFF":
        raise ParseError(f"{path}:1: missing OFF header")
    cursor = 1
    header = body[0][1].split()
    if len(header) > 1:  # counts on the header line
        counts = header[1:4]
    else:
        if cursor >= len(body):
            raise ParseError(f"{path}: missing element counts")
        counts = body[cursor][1].split()[:3]
        cursor += 1
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except (ValueError, IndexError):
        raise ParseError(f"{path}: bad element counts {counts!r}") from None
    if len(body) < cursor + nv + nf:
        n = body[-1][0] if body else 0
        raise ParseError(f"{path}:{n}: truncated OFF (expected {nv} vertices, {nf} faces)")
    vertices = []
    for lineno, line in body[cursor : cursor + nv]:
        parts = line.split()
        try:
            vertices.append([float(parts[0]), float(parts[1]), float(parts[2])])
        except (ValueError, IndexError):
            raise ParseError(f"{path}:{lineno}: bad vertex line") from None
    faces = []
    for lineno, line in body[cursor + nv : cursor + nv + nf]:
        parts = line.split()
        try:
            n = int(parts[0])
            idx = [int(p) for p in parts[1 : 1 + n]]
        except (ValueError, IndexError):
            raise ParseError(f"{path}:{lineno}: bad face line") from None
        if len(idx) != n or n < 3:
            raise ParseError(f"{path}:{lineno}: face lists {len(idx)} of {n} indices")
        for k in range(1, n - 1):
            faces.append([idx[0], idx[k], idx[k + 1]])
    return _finish("OFF", path, vertices, faces)


def _load_stl(path):
    data = Path(path).read_bytes()
    if len(data) < 84:
        raise ParseError(f"{path}: byte 0: binary STL shorter than its 84-byte header")
    if data[:5] == b"solid" and b"facet" in data[:512]:
        raise ParseError(f"{path}: byte 0: ASCII STL is not supported, use binary")
    (count,) = struct.unpack_from("<I", data, 80)
    need = 84 + 50 * count
    if len(data) < need:
        raise ParseError(
            f"{path}: byte {len(data)}: truncated STL ({count} triangles declared)"
        )
    # trailing padding beyond the declared records is tolerated
    records = np.frombuffer(data, np.uint8, 50 * count, 84).reshape(count, 50)
    coords = (
        records[:, 12:48]
        .copy()
        .view("<f4")
        .astype(np.float64)
        .reshape(count, 3, 3)
    )
    vertices = coords.reshape(-1, 3)
    faces = np.arange(3 * count, dtype=np.int64).reshape(count, 3)
    return _finish("STL", path, vertices, faces)


def load(path):
    """Parse a mesh file by extension into a MeshFile."""
    fmt = _format_of(path)
    if not Path(path).exists():
        raise ParseError(f"{path}: no such file")
    if fmt == "OBJ":
        return _load_obj(path)
    if fmt == "OFF":
        return _load_off(path)
    return _load_stl(path)


def _g17(x):
    return format(float(x), ".17g")


def _coerce(obj):
    """(vertices, triangles, provenance-or-None) from a BooleanResult,
    MeshFile, or plain (vertices, triangles) pair."""
    if hasattr(obj, "provenance"):
        return obj.vertices, obj.triangles, obj.provenance
    if isinstance(obj, MeshFile):
        return obj.vertices, obj.triangles, None
    v, f = obj
    return (
        np.asarray(v, np.float64).reshape(-1, 3),
        np.asarray(f, np.int64).reshape(-1, 3),
        None,
    )


def _labels_hex(provenance):
    out = []
    for row in provenance:
        bits = int.from_bytes(np.ascontiguousarray(row, np.uint64).tobytes(), "little")
        out.append(format(bits, "x"))
    return out


def save(obj, path):
    """Write a mesh by extension; emits ``<path>.labels`` when the object
    carries per-triangle provenance (one hex bitmask per face line)."""
    fmt = _format_of(path)
    vertices, triangles, provenance = _coerce(obj)
    if fmt == "OBJ":
        with open(path, "w") as fh:
            for v in vertices:
                fh.write(f"v {_g17(v[0])} {_g17(v[1])} {_g17(v[2])}\n")
            for t in triangles:
                fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
    elif fmt == "OFF":
        with open(path, "w") as fh:
            fh.write("OFF\n")
            fh.write(f"{len(vertices)} {len(triangles)} 0\n")
            for v in vertices:
                fh.write(f"{_g17(v[0])} {_g17(v[1])} {_g17(v[2])}\n")
            for t in triangles:
                fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")
    else:
        tri = vertices[triangles].astype("<f4") if len(triangles) else np.zeros(
            (0, 3, 3), "<f4"
        )
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            n = np.where(norm > 0, n / np.where(norm == 0, 1, norm), 0).astype("<f4")
        with open(path, "wb") as fh:
            fh.write(b"\0" * 80)
            fh.write(struct.pack("<I", len(triangles)))
            for k in range(len(triangles)):
                fh.write(n[k].tobytes())
                fh.write(tri[k].tobytes())
                fh.write(b"\0\0")
    if provenance is not None:
        Path(str(path) + ".labels").write_text(
            "".join(line + "\n" for line in _labels_hex(provenance))
        )


def load_labels(path):
    """Read a sidecar label file into per-triangle Python-int bitsets."""
    text = Path(path).read_text()
    return [int(line, 16) for line in text.splitlines() if line.strip()]
