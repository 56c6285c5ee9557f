"""Interactive session service: WebSocket control + binary result stream.

One session per connection.  A control task ingests JSON messages and stays
responsive at all times; a compute task free-runs the boolean pipeline on
the latest transform/operator snapshot (stale updates are coalesced,
latest wins) and streams each finished frame as one binary message.  Every
frame is computed from scratch on transformed vertex copies — no state is
carried between frames, so frame N equals a cold run on the same inputs.

Binary frame layout (little-endian, normative for clients):

    u64  frame id (strictly increasing per session)
    u8   operator tag (0 = union, 1 = intersect, 2 = subtract)
    u32  vertex count V
    u32  triangle count T
    f32  positions, 3 per vertex (computation stays binary64; the wire
         format is a rendering view, not ground truth)
    u32  indices, 3 per triangle
    u8   origin label bitmask per triangle (bit k = input mesh k)
    u32  compute time in microseconds

Control messages and acks are JSON text frames:

    {"t": "load", "a": PATH, "b": PATH}
    {"t": "op", "v": "union" | "intersect" | "subtract"}
    {"t": "xform", "mesh": 0 | 1, "m": [16 doubles, row-major]}
    {"t": "pause"} / {"t": "resume"}

Malformed input produces an error frame and the session stays alive.
"""

from __future__ import annotations

import asyncio
import json
import struct
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .booleans import boolean
from .errors import MeshBoolError
from .meshio import load

OP_TAGS = {"union": 0, "intersect": 1, "subtract": 2}
_LIB_OPS = {"union": "union", "intersect": "intersection", "subtract": "difference"}

_ORTHO_TOL = 1e-9


def reorthonormalize(m):
    """Split a row-major 4×4 into the nearest rotation + translation.

    Returns (R, t, adjusted): the closest proper rotation in the Frobenius
    sense (via SVD, reflection corrected), the translation column, and
    whether the input's linear part had to be adjusted to become rigid.
    """
    m = np.asarray(m, np.float64).reshape(4, 4)
    a = m[:3, :3]
    u, _, vt = np.linalg.svd(a)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    adjusted = bool(np.abs(a - r).max() > _ORTHO_TOL)
    return r, m[:3, 3].copy(), adjusted


def encode_frame(frame_id, op_name, result, micros):
    labels = (result.provenance[:, 0].astype(np.uint64) & np.uint64(0xFF)).astype(
        "u1"
    ) if result.n_triangles else np.zeros(0, "u1")
    return b"".join(
        (
            struct.pack(
                "<QBII",
                frame_id,
                OP_TAGS[op_name],
                result.n_vertices,
                result.n_triangles,
            ),
            np.ascontiguousarray(result.vertices, "<f4").tobytes(),
            np.ascontiguousarray(result.triangles, "<u4").tobytes(),
            labels.tobytes(),
            struct.pack("<I", micros),
        )
    )


class Session:
    """State of one connection: base meshes, per-mesh rigid transforms,
    operator, pacing flags, and counters for the state snapshot."""

    def __init__(self, threads=1, max_fps=None):
        self.threads = threads
        self.max_fps = max_fps
        self.meshes = None  # [(vertices, triangles), (vertices, triangles)]
        self.paths = None
        self.rotations = [np.eye(3), np.eye(3)]
        self.translations = [np.zeros(3), np.zeros(3)]
        self.op = "union"
        self.paused = False
        self.frame_id = 0
        self.frames_computed = 0
        self.xforms_received = 0
        self.dirty = asyncio.Event()
        self.published = None  # last emitted frame bytes (double buffer slot)

    def state(self):
        return {
            "loaded": self.paths,
            "op": self.op,
            "paused": self.paused,
            "frames": self.frames_computed,
            "xforms": self.xforms_received,
            "triangles": [len(f) for _, f in self.meshes] if self.meshes else None,
        }

    def snapshot(self):
        """Latest-wins snapshot for one frame computation."""
        meshes = [
            ((v @ self.rotations[k].T) + self.translations[k], f)
            for k, (v, f) in enumerate(self.meshes)
        ]
        return self.op, meshes

    def compute(self, op, meshes):
        t0 = time.perf_counter()
        result = boolean(_LIB_OPS[op], meshes, threads=self.threads)
        micros = min(int((time.perf_counter() - t0) * 1e6), 0xFFFFFFFF)
        self.frame_id += 1
        self.frames_computed += 1
        frame = encode_frame(self.frame_id, op, result, micros)
        self.published = frame
        return frame


def _handle_control(session, msg):
    """Apply one parsed control message; returns the ack payload."""
    t = msg.get("t")
    if t == "load":
        a, b = msg["a"], msg["b"]
        session.meshes = [load(a).mesh(), load(b).mesh()]
        session.paths = [str(a), str(b)]
        session.rotations = [np.eye(3), np.eye(3)]
        session.translations = [np.zeros(3), np.zeros(3)]
        session.dirty.set()
        return {}
    if t == "op":
        v = msg.get("v")
        if v not in OP_TAGS:
            raise MeshBoolError(f"unknown operator {v!r}")
        session.op = v
        session.dirty.set()
        return {}
    if t == "xform":
        k = msg.get("mesh")
        if k not in (0, 1):
            raise MeshBoolError(f"xform mesh must be 0 or 1, got {k!r}")
        r, tv, adjusted = reorthonormalize(msg["m"])
        session.rotations[k] = r
        session.translations[k] = tv
        session.xforms_received += 1
        session.dirty.set()
        return {"adjusted": adjusted}
    if t == "pause":
        session.paused = True
        return {}
    if t == "resume":
        session.paused = False
        session.dirty.set()
        return {}
    raise MeshBoolError(f"unknown message type {t!r}")


async def _frame_loop(ws, session, send_lock):
    """Free-running compute loop: one frame in flight at a time, latest
    state snapshot per frame, optional fps cap, errors reported per frame
    without stopping the loop."""
    loop = asyncio.get_running_loop()
    while True:
        if session.paused or session.meshes is None:
            session.dirty.clear()
            await session.dirty.wait()
            continue
        session.dirty.clear()
        op, meshes = session.snapshot()
        t0 = time.perf_counter()
        try:
            frame = await loop.run_in_executor(None, session.compute, op, meshes)
        except MeshBoolError as exc:
            async with send_lock:
                try:
                    await ws.send_text(
                        json.dumps(
                            {
                                "t": "error",
                                "frame": session.frame_id + 1,
                                "msg": str(exc),
                            }
                        )
                    )
                except Exception:  # connection gone; control task owns shutdown
                    return
            session.dirty.clear()
            await session.dirty.wait()
            continue
        async with send_lock:
            try:
                await ws.send_bytes(frame)
            except Exception:  # connection gone; control task owns shutdown
                return
        if session.max_fps:
            budget = 1.0 / session.max_fps - (time.perf_counter() - t0)
            if budget > 0:
                await asyncio.sleep(budget)


def create_app(threads=1, max_fps=None):
    app = FastAPI(title="meshbool session service")

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(threads=threads, max_fps=max_fps)
        send_lock = asyncio.Lock()
        await ws.send_text(json.dumps({"t": "hello", "protocol": 1}))
        task = asyncio.create_task(_frame_loop(ws, session, send_lock))
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise MeshBoolError("control message must be a JSON object")
                    extra = _handle_control(session, msg)
                    reply = {"t": "ack", "of": msg.get("t"), "state": session.state()}
                    reply.update(extra)
                except (MeshBoolError, KeyError, ValueError, TypeError) as exc:
                    reply = {"t": "error", "msg": f"{exc}"}
                async with send_lock:
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()
            try:
                await task
            except (asyncio.CancelledError, Exception):
                pass

    return app


def run_server(host="127.0.0.1", port=8765, threads=1, max_fps=None):
    import uvicorn

    uvicorn.run(create_app(threads=threads, max_fps=max_fps), host=host, port=port)
