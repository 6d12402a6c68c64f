"""Command-line entry points: build, flex, check, net, search, serve.

Exit codes: 0 success, 2 validation error, 3 solver failure. `--json` turns
errors into structured JSON on stdout for scripting.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import report as report_mod
from .catalog import MODELS, catalog, model_schemas
from .errors import (
    CatalogError,
    ConstructionError,
    MeshError,
    NetError,
    SolveError,
    SymmetryError,
)
from .flexion import DihedralDriver, DistanceDriver, find_motion_range, problem_for, trace
from .meshio import dump_payload, object_from_payload, object_payload, save_obj
from .netexport import export_svg, unfold
from .search import search_embedding
from .twinning import Crinkle, Twin

VALIDATION_ERRORS = (
    CatalogError,
    MeshError,
    SymmetryError,
    ConstructionError,
    NetError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)


def _parse_params(items) -> dict[str, float]:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise CatalogError(f"--param expects k=v, got {item!r}")
        key, val = item.split("=", 1)
        params[key.strip()] = float(val)
    return params


def _load_payload(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _mesh_of(obj):
    return obj.mesh if isinstance(obj, (Twin, Crinkle)) else obj


def _resolve_input(source: str, params):
    """A model name or a mesh/payload JSON file."""
    if source in MODELS:
        obj = catalog(source, _parse_params(params))
        return obj
    return object_from_payload(_load_payload(source))


def _resolve_driver(spec: str | None, obj):
    mesh = _mesh_of(obj)
    if spec is None or spec == "auto":
        if isinstance(obj, (Twin, Crinkle)):
            return None  # problem_for picks the default
        raise CatalogError("plain meshes need an explicit --driver")
    if spec.startswith("dihedral:"):
        parts = spec.split(":")[1:]
        i, j = (_vertex_index(mesh, p) for p in parts)
        fids = mesh.edge_faces().get((min(i, j), max(i, j)))
        if not fids or len(fids) != 2:
            raise CatalogError(f"dihedral driver edge ({i},{j}) is not interior")
        faces = tuple(tuple(mesh.faces[f].tolist()) for f in fids)
        return [DihedralDriver(i, j, faces)]
    if ":" in spec:
        a, b = spec.split(":", 1)
        return [DistanceDriver(_vertex_index(mesh, a), _vertex_index(mesh, b))]
    # compact label pair like AA': try every split into two known labels
    for cut in range(1, len(spec)):
        left, right = spec[:cut], spec[cut:]
        if left in mesh.labels and right in mesh.labels:
            return [DistanceDriver(mesh.labels[left], mesh.labels[right])]
    raise CatalogError(f"cannot parse driver {spec!r}")


def _vertex_index(mesh, token: str) -> int:
    token = token.strip()
    if token in mesh.labels:
        return mesh.labels[token]
    try:
        idx = int(token)
    except ValueError:
        raise CatalogError(f"unknown vertex {token!r} (not a label, not an index)") from None
    if not 0 <= idx < len(mesh.vertices):
        raise CatalogError(f"vertex index {idx} out of range")
    return idx


def cmd_build(args) -> dict:
    params = _parse_params(args.param)
    obj = catalog(args.model, params)
    payload = object_payload(obj, model=args.model, params=params)
    if args.output:
        if args.output.endswith(".obj"):
            save_obj(_mesh_of(obj), args.output)
        else:
            Path(args.output).write_text(dump_payload(payload))
    return payload


def cmd_flex(args) -> dict:
    obj = _resolve_input(args.source, args.param)
    drivers = _resolve_driver(args.driver, obj)
    problem = problem_for(obj, drivers=drivers)
    if args.range == "auto":
        lo, hi = find_motion_range(problem)
        if hi <= lo:
            raise SolveError("no motion found in either direction", "locked")
    else:
        try:
            lo_s, hi_s = args.range.split(":")
            lo, hi = float(lo_s), float(hi_s)
        except ValueError:
            raise CatalogError(f"--range expects a:b or auto, got {args.range!r}") from None
    path = trace(problem, np.linspace(lo, hi, args.frames))
    payload = path.to_dict()
    payload["mesh"] = object_payload(obj)
    if args.output:
        Path(args.output).write_text(dump_payload(payload))
    if args.report:
        rep = report_mod.check_path(_mesh_of(obj), payload["frames"])
        report_mod.render_path_report(rep, args.report)
    return {
        "status": path.status,
        "frames": len(path.frames),
        "range": [lo, hi],
        "max_edge_err": max(f.diag.edge_err for f in path.frames),
        "output": args.output,
    }


def cmd_check(args) -> dict:
    payload = _load_payload(args.source) if args.source not in MODELS else None
    if payload is not None and "frames" in payload:
        mesh_payload = payload.get("mesh")
        if mesh_payload is None:
            if not args.mesh:
                raise CatalogError("path file has no embedded mesh; pass --mesh")
            mesh_payload = _load_payload(args.mesh)
        obj = object_from_payload(mesh_payload)
        rep = report_mod.check_path(_mesh_of(obj), payload["frames"], args.rank_tol)
        if args.report:
            report_mod.render_path_report(rep, args.report)
        return rep
    obj = _resolve_input(args.source, args.param)
    rep = report_mod.check_mesh(_mesh_of(obj), args.rank_tol)
    if args.report:
        report_mod.render_mesh_report(rep, args.report)
    return rep


def cmd_net(args) -> dict:
    obj = _resolve_input(args.source, args.param)
    mesh = _mesh_of(obj)
    coords = None
    if args.frame is not None:
        if not args.path:
            raise CatalogError("--frame needs --path with the traced frames")
        frames = _load_payload(args.path)["frames"]
        if not 0 <= args.frame < len(frames):
            raise CatalogError(f"frame {args.frame} out of range (path has {len(frames)})")
        coords = np.asarray(frames[args.frame]["vertices"], dtype=float)
    net = unfold(mesh, coords, root=args.root)
    svg = export_svg(net, unit_mm=args.scale)
    out = args.output or "net.svg"
    Path(out).write_text(svg)
    return {
        "output": out,
        "faces": len(mesh.faces),
        "creases": len(net.creases),
        "cuts": len(net.cuts),
        "overlaps": [list(o) for o in net.overlaps],
    }


def cmd_search(args) -> dict:
    box = {}
    for item in args.box or []:
        if "=" not in item or ":" not in item.split("=", 1)[1]:
            raise CatalogError(f"--box expects name=lo:hi, got {item!r}")
        key, rng = item.split("=", 1)
        lo, hi = rng.split(":", 1)
        box[key.strip()] = (float(lo), float(hi))
    if not box:
        raise CatalogError("search needs at least one --box name=lo:hi")
    scan = search_embedding(
        args.template, box, budget=args.budget, seed=args.seed,
        frames=args.frames, out_dir=args.out_dir,
    )
    d = scan.to_dict()
    if args.output:
        Path(args.output).write_text(dump_payload(d))
    if args.report:
        report_mod.render_scan_report(d, args.report)
    return d


def cmd_models(args) -> dict:
    return {"models": model_schemas()}


def cmd_serve(args) -> dict:
    from .service import serve

    serve(host=args.host, port=args.port)
    return {}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinflex",
        description="Build twinned flexible polyhedra, trace their flexes, "
        "check invariants and export nets.",
    )
    parser.add_argument("--json", action="store_true", help="print results/errors as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a catalog model")
    p.add_argument("model")
    p.add_argument("--param", action="append", metavar="k=v")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("flex", help="trace a flexing motion")
    p.add_argument("source", help="model name or mesh JSON file")
    p.add_argument("--param", action="append", metavar="k=v")
    p.add_argument("--driver", default="auto", help="auto | i:j | A:A' | AA' | dihedral:i:j")
    p.add_argument("--range", default="auto", help="a:b or auto")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("-o", "--output")
    p.add_argument("--report", metavar="DIR", help="write frames.csv + figures here")
    p.set_defaults(func=cmd_flex)

    p = sub.add_parser("check", help="rigidity + intersections + volume report")
    p.add_argument("source", help="model name, mesh JSON, or path JSON")
    p.add_argument("--param", action="append", metavar="k=v")
    p.add_argument("--mesh", help="mesh JSON when checking a bare path file")
    p.add_argument("--rank-tol", type=float, default=1e-8)
    p.add_argument("--report", metavar="DIR", help="write report.csv + figures here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("net", help="unfold to a printable SVG net")
    p.add_argument("source", help="model name or mesh JSON file")
    p.add_argument("--param", action="append", metavar="k=v")
    p.add_argument("--frame", type=int, help="use this frame of --path instead of rest coordinates")
    p.add_argument("--path", help="path JSON with frames")
    p.add_argument("--root", type=int, help="root face (default: largest)")
    p.add_argument("--scale", type=float, default=20.0, help="mm per model unit")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("search", help="scan a parameter box for embedded flexes")
    p.add_argument("template")
    p.add_argument("--box", action="append", metavar="name=lo:hi")
    p.add_argument("--budget", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=25)
    p.add_argument("--out-dir", help="persist the best sample's mesh and path here")
    p.add_argument("-o", "--output")
    p.add_argument("--report", metavar="DIR", help="write scan.csv + figure here")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("models", help="list catalog models and their parameters")
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("serve", help="run the local HTTP service")
    p.add_argument("--port", type=int, default=8753)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except SolveError as exc:
        _emit_error(args, exc, reason=exc.reason)
        return 3
    except VALIDATION_ERRORS as exc:
        _emit_error(args, exc)
        return 2
    if args.json:
        print(json.dumps(result, sort_keys=True))
    else:
        _print_human(args.command, result)
    return 0


def _emit_error(args, exc, reason=None):
    if getattr(args, "json", False):
        payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if reason:
            payload["error"]["reason"] = reason
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"error: {exc}", file=sys.stderr)


def _print_human(command: str, result: dict) -> None:
    if command == "models":
        for m in result["models"]:
            params = ", ".join(f"{p['name']}={p['default']}" for p in m["params"])
            print(f"{m['name']:22s} [{m['returns']}] {m['doc']}")
            print(f"{'':22s} params: {params}")
        return
    if command == "check" and "mesh_check" in result:
        static = result["mesh_check"]
        frames = result["frames"]
        embedded = sum(1 for r in frames if r["embedded"])
        print(f"flex modes: {static['flex_modes']}  rank: {static['rank']}  "
              f"isostatic: {static['isostatic']}")
        print(f"frames: {len(frames)}  embedded: {embedded}/{len(frames)}")
        vols = [r["volume"] for r in frames if r["volume"] is not None]
        if vols:
            print(f"volume: {vols[0]:.6g}  drift: {max(vols) - min(vols):.3e}")
        return
    if command == "check":
        print(f"dof: {result['dof']}  rank: {result['rank']}  trivial: {result['trivial']}  "
              f"flex modes: {result['flex_modes']}  isostatic: {result['isostatic']}")
        vol = result["volume"]
        print(f"volume: {'open mesh' if vol is None else format(vol, '.9g')}")
        print(f"embedded: {result['embedded']}  intersecting pairs: {len(result['intersections'])}  "
              f"touching: {result['touching']}")
        return
    printable = {k: v for k, v in result.items() if k not in ("vertices", "faces", "frames", "samples")}
    for k, v in printable.items():
        if isinstance(v, (dict, list)) and len(str(v)) > 120:
            v = f"<{type(v).__name__} of {len(v)}>"
        print(f"{k}: {v}")


if __name__ == "__main__":
    sys.exit(main())
