"""Command-line driver.

Exit codes: 0 success, 1 invalid input (unreadable/malformed/failed
validation), 2 internal invariant violation or unexpected error.
"""

from __future__ import annotations

import csv
import itertools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import kernel
from .booleans import boolean
from .errors import InvalidInput, InvariantViolation, MeshBoolError
from .meshio import _EXTENSIONS, load, save
from .topology import check_topology, validate_input

_OP_NAMES = {"union": "union", "intersect": "intersection", "subtract": "difference"}
_AXES = {"X": 0, "Y": 1, "Z": 2}


def _echo_check(mesh):
    components, euler, manifold = check_topology(mesh)
    click.echo(f"({components}, {euler}, {'true' if manifold else 'false'})")


def _normalized(meshes):
    """Jointly scale/translate all inputs into the unit cube (longest side)."""
    lo = np.min([v.min(axis=0) for v, _ in meshes], axis=0)
    hi = np.max([v.max(axis=0) for v, _ in meshes], axis=0)
    span = float((hi - lo).max())
    if span <= 0:
        return meshes
    return [((v - lo) / span, f) for v, f in meshes]


@click.group()
def cli():
    """Exact booleans on triangle meshes."""


@cli.command("op")
@click.argument("operation", type=click.Choice(sorted(_OP_NAMES)))
@click.argument("inputs", nargs=-1, required=True, type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path(), help="output mesh path")
@click.option("--report", "report_path", type=click.Path(), help="write the run report as JSON")
@click.option("--check", is_flag=True, help="print (components, euler, manifold) of the result")
@click.option("--axis", type=click.Choice(sorted(_AXES)), default="Z", help="classification ray axis preference")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--validate-input", "validate", is_flag=True, help="reject inputs that are not closed oriented manifolds")
@click.option("--octree-leaf", type=int, default=None, help="octree leaf capacity")
@click.option("--octree-depth", type=int, default=None, help="octree maximum depth")
@click.option("--force-exact-tier", is_flag=True, help="route every kernel predicate through the exact rational tier (audit mode; output is unchanged)")
@click.option("--normalize", is_flag=True, help="scale all inputs jointly into the unit cube before computing")
def op_cmd(operation, inputs, output, report_path, check, axis, threads, validate,
           octree_leaf, octree_depth, force_exact_tier, normalize):
    """Compute OPERATION over two or more input meshes.

    `subtract` removes every later mesh from the first; `union` and
    `intersect` are symmetric over all inputs.
    """
    if len(inputs) < 2:
        raise click.UsageError("need at least two input meshes")
    meshes = []
    for path in inputs:
        mf = load(path)
        if validate:
            rep = validate_input(mf)
            if rep["violations"]:
                raise InvalidInput(f"{path}: " + "; ".join(rep["violations"]))
        meshes.append(mf.mesh())
    if normalize:
        meshes = _normalized(meshes)
    if force_exact_tier:
        kernel.force_exact(True)
    try:
        result = boolean(
            _OP_NAMES[operation],
            meshes,
            axis=_AXES[axis],
            threads=threads,
            leaf_capacity=octree_leaf,
            max_depth=octree_depth,
        )
    finally:
        kernel.force_exact(False)
    save(result, output)
    if report_path:
        Path(report_path).write_text(result.report.to_json() + "\n")
    for w in result.report.warnings:
        click.echo(f"warning: {w}", err=True)
    click.echo(
        f"{operation}: {result.n_triangles} triangles, {result.n_vertices} vertices "
        f"-> {output} ({result.report.timings['total_seconds']:.3f}s)"
    )
    if check:
        _echo_check(result)


@cli.command("check")
@click.argument("mesh_path", type=click.Path())
@click.option("--self-intersections", is_flag=True, help="also run the exact self-intersection scan")
def check_cmd(mesh_path, self_intersections):
    """Print (components, Euler characteristic, manifold) of a mesh file."""
    mf = load(mesh_path)
    _echo_check(mf)
    rep = validate_input(mf, scan_self_intersections=self_intersections)
    for v in rep["violations"]:
        click.echo(f"violation: {v}", err=True)


@cli.command("bench")
@click.argument("corpus_dir", type=click.Path())
@click.option("--out", "out_csv", required=True, type=click.Path(), help="CSV output path")
@click.option("--threads", type=int, default=1, show_default=True)
def bench_cmd(corpus_dir, out_csv, threads):
    """Run every operator over every mesh pair in a corpus directory."""
    paths = sorted(
        p for p in Path(corpus_dir).iterdir()
        if p.suffix.lower() in _EXTENSIONS
    )
    if len(paths) < 2:
        raise click.UsageError(f"{corpus_dir}: need at least two mesh files")
    fields = [
        "a", "b", "op", "triangles_in", "triangles_out", "patches", "rays",
        "preprocess_seconds", "arrange_seconds", "classify_seconds",
        "compose_seconds", "total_seconds", "closed",
    ]
    rows = []
    for pa, pb in itertools.combinations(paths, 2):
        ma, mb = load(pa).mesh(), load(pb).mesh()
        for opname, libop in sorted(_OP_NAMES.items()):
            result = boolean(libop, [ma, mb], threads=threads)
            rep = result.report
            rows.append({
                "a": pa.name,
                "b": pb.name,
                "op": opname,
                "triangles_in": rep.preprocess["triangles"],
                "triangles_out": result.n_triangles,
                "patches": rep.booleans["patches"],
                "rays": rep.classification["rays"],
                "preprocess_seconds": f"{rep.timings['preprocess_seconds']:.6f}",
                "arrange_seconds": f"{rep.timings['arrange_seconds']:.6f}",
                "classify_seconds": f"{rep.timings['classify_seconds']:.6f}",
                "compose_seconds": f"{rep.timings['compose_seconds']:.6f}",
                "total_seconds": f"{rep.timings['total_seconds']:.6f}",
                "closed": result.report.output["closed"],
            })
    with open(out_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    totals = [float(r["total_seconds"]) for r in rows]
    click.echo(
        f"{len(rows)} runs -> {out_csv} "
        f"(min {min(totals):.3f}s / max {max(totals):.3f}s / "
        f"avg {sum(totals) / len(totals):.3f}s)"
    )


@cli.command("serve")
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--max-fps", type=float, default=None, help="cap the frame loop rate")
def serve_cmd(port, host, threads, max_fps):
    """Run the interactive session service (WebSocket on localhost)."""
    from .service import run_server

    run_server(host=host, port=port, threads=threads, max_fps=max_fps)


def cli_main(argv=None):
    """Entry point returning an exit code instead of raising SystemExit."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        return 1
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except MeshBoolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
