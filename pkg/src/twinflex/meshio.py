"""Mesh serialization: the JSON schema used across the toolkit, plus OBJ."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import MeshError
from .geometry import TriMesh


def mesh_to_dict(mesh: TriMesh) -> dict:
    d = {
        "vertices": [[float(x) for x in v] for v in mesh.vertices],
        "faces": [[int(i) for i in f] for f in mesh.faces],
    }
    if mesh.labels:
        d["labels"] = {k: int(v) for k, v in mesh.labels.items()}
    return d


def mesh_from_dict(d: dict) -> TriMesh:
    try:
        vertices = d["vertices"]
        faces = d["faces"]
    except (KeyError, TypeError):
        raise MeshError("mesh JSON must contain 'vertices' and 'faces'") from None
    labels = d.get("labels", {}) or {}
    return TriMesh(np.asarray(vertices, dtype=float), np.asarray(faces, dtype=int), dict(labels))


def save_mesh_json(mesh: TriMesh, path: str | Path) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(mesh), indent=2) + "\n")


def load_mesh_json(path: str | Path) -> TriMesh:
    return mesh_from_dict(json.loads(Path(path).read_text()))


def save_obj(mesh: TriMesh, path: str | Path) -> None:
    """Wavefront OBJ with v/f records; face indices are 1-based."""
    lines = []
    for v in mesh.vertices:
        lines.append("v {:.17g} {:.17g} {:.17g}".format(*v))
    for f in mesh.faces:
        lines.append("f {} {} {}".format(f[0] + 1, f[1] + 1, f[2] + 1))
    Path(path).write_text("\n".join(lines) + "\n")


def load_obj(path: str | Path) -> TriMesh:
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise MeshError(f"OBJ line {ln}: vertex needs 3 coordinates")
            vertices.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            if len(parts) != 4:
                raise MeshError(f"OBJ line {ln}: only triangular faces are supported")
            # tolerate v/vt/vn references; keep the vertex index
            faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
        # other record types (vn, vt, o, g, ...) are ignored
    return TriMesh(np.asarray(vertices, dtype=float), np.asarray(faces, dtype=int))


def load_mesh(path: str | Path) -> TriMesh:
    """Dispatch on file extension (.json or .obj)."""
    p = Path(path)
    if p.suffix.lower() == ".obj":
        return load_obj(p)
    return load_mesh_json(p)


def dump_payload(d: dict) -> str:
    """Canonical JSON for CLI files and HTTP bodies: same bytes either way."""
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def object_payload(obj, model: str | None = None, params: dict | None = None) -> dict:
    """Mesh JSON plus the construction metadata of richer model objects.

    Twins carry their equator, pairing and kind; caps and crinkles their
    boundary (and phantom pairs). The extra keys are additive on top of the
    plain mesh schema, so any consumer of the mesh schema can read them.
    """
    from .twinning import Cap, Crinkle, Twin

    mesh = obj.mesh if isinstance(obj, (Twin, Cap, Crinkle)) else obj
    d = mesh_to_dict(mesh)
    if isinstance(obj, Twin):
        d["kind"] = "twin"
        d["twin_type"] = obj.kind
        d["equator"] = list(obj.equator)
        d["pairing"] = {str(k): int(v) for k, v in sorted(obj.pairing.items())}
    elif isinstance(obj, Crinkle):
        d["kind"] = "crinkle"
        d["boundary"] = list(obj.boundary)
        d["phantom_pairs"] = [list(p) for p in obj.phantom_pairs]
    elif isinstance(obj, Cap):
        d["kind"] = "cap"
        d["boundary"] = list(obj.boundary)
    else:
        d["kind"] = "mesh"
    if model is not None:
        d["model"] = model
    if params is not None:
        d["params"] = {k: float(v) for k, v in sorted(params.items())}
    return d


def object_from_payload(d: dict):
    """Rebuild the richest object the payload describes."""
    from .twinning import Cap, Crinkle, Twin

    mesh = mesh_from_dict(d)
    kind = d.get("kind", "mesh")
    if kind == "twin":
        return Twin(
            mesh=mesh,
            equator=tuple(d["equator"]),
            pairing={int(k): int(v) for k, v in d["pairing"].items()},
            kind=d["twin_type"],
        )
    if kind == "crinkle":
        return Crinkle(
            mesh=mesh,
            boundary=tuple(d["boundary"]),
            phantom_pairs=tuple((int(a), int(b)) for a, b in d["phantom_pairs"]),
        )
    if kind == "cap":
        return Cap(mesh=mesh, boundary=tuple(d["boundary"]))
    return mesh
