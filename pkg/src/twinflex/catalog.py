"""Parameterized model inventory: seeds, twins, crinkles, and assemblies.

Every model is built from a few scalar parameters with documented ranges and
non-degenerate defaults. Twinned models return a `Twin` (mesh plus equator
and pairing); seeds return a `TriMesh`; crinkles return a `Crinkle`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CatalogError, ConstructionError
from .geometry import TriMesh, face_areas, orient_faces
from .symmetry import TYPE_I, TYPE_II, SymmetricQuad
from .twinning import (
    Cap,
    Crinkle,
    Patch,
    Twin,
    erect_tent,
    glue_boundaries,
    make_cap,
    make_crinkle,
    replace_hinge_with_crinkles,
    twin,
)


@dataclass(frozen=True)
class Param:
    name: str
    default: float
    lo: float
    hi: float
    doc: str

    def to_dict(self) -> dict:
        return {"name": self.name, "default": self.default, "lo": self.lo, "hi": self.hi, "doc": self.doc}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    returns: str  # "mesh" | "twin" | "cap" | "crinkle"
    doc: str
    params: tuple[Param, ...]
    builder: Callable = field(repr=False)
    driver_labels: tuple[str, str] | None = None  # default flex driver for bare-mesh models

    def schema(self) -> dict:
        return {
            "name": self.name,
            "returns": self.returns,
            "doc": self.doc,
            "params": [p.to_dict() for p in self.params],
            "driver": list(self.driver_labels) if self.driver_labels else None,
        }


def _mesh(vertices, faces, labels) -> TriMesh:
    verts = np.asarray(vertices, dtype=float)
    return TriMesh(verts, orient_faces(verts, np.asarray(faces, dtype=int)), labels)


def _resolve(spec: ModelSpec, overrides: dict[str, float] | None) -> dict[str, float]:
    values = {p.name: p.default for p in spec.params}
    bounds = {p.name: (p.lo, p.hi) for p in spec.params}
    for key, val in (overrides or {}).items():
        if key not in values:
            raise CatalogError(f"model {spec.name!r} has no parameter {key!r}")
        lo, hi = bounds[key]
        val = float(val)
        if not lo <= val <= hi:
            raise CatalogError(f"parameter {key}={val} outside [{lo}, {hi}] for model {spec.name!r}")
        values[key] = val
    return values


# -- seed polyhedra --------------------------------------------------------


def _pyramid_seed(p: dict) -> TriMesh:
    a = np.array([p["ax"], p["ay"], p["az"]])
    b = np.array([p["bx"], p["by"], p["bz"]])
    a2 = np.array([-a[0], -a[1], a[2]])  # half-rotation about the z-axis
    b2 = np.array([-b[0], -b[1], b[2]])
    c = np.array([p["cx"], p["cy"], p["cz"]])
    verts = [a, b, a2, b2, c]
    faces = [(4, 0, 1), (4, 1, 2), (4, 2, 3), (4, 3, 0), (0, 2, 1), (0, 3, 2)]
    return _mesh(verts, faces, {"A": 0, "B": 1, "A'": 2, "B'": 3, "C": 4})


def _kite_pyramid_seed(p: dict) -> TriMesh:
    a = np.array([p["ax"], 0.0, 0.0])
    a2 = np.array([-p["a2x"], 0.0, 0.0])
    b = np.array([p["bx"], p["by"], p["bz"]])
    b2 = np.array([b[0], b[1], -b[2]])  # mirror in the z=0 plane
    e = np.array([p["ex"], p["ey"], p["ez"]])
    verts = [a, b, a2, b2, e]
    faces = [(4, 0, 1), (4, 1, 2), (4, 2, 3), (4, 3, 0), (0, 2, 1), (0, 3, 2)]
    return _mesh(verts, faces, {"A": 0, "B": 1, "A'": 2, "B'": 3, "E": 4})


def _anticupola_seed(p: dict, star: bool) -> TriMesh:
    s = p["base_half"]
    a1 = np.array([0.0, 0.0, -s])
    a2 = np.array([-s, 0.0, 0.0])
    a3 = np.array([0.0, 0.0, s])
    a4 = np.array([s, 0.0, 0.0])
    sign = -1.0 if star else 1.0
    c1 = np.array([-p["x_off"], p["h1"], p["z_off"]])
    c2 = np.array([p["x_off"], sign * p["h2"], p["z_off"]])
    verts = [a1, a2, a3, a4, c1, c2]
    faces = [
        (3, 5, 0), (0, 4, 5), (0, 4, 1), (2, 4, 1), (2, 4, 5), (2, 5, 3),
        (0, 1, 2), (0, 2, 3),
    ]
    return _mesh(verts, faces, {"A1": 0, "A2": 1, "A3": 2, "A4": 3, "C1": 4, "C2": 5})


# -- twins ------------------------------------------------------------------


def _bricard1(p: dict) -> Twin:
    seed = _pyramid_seed(p)
    quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"), seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
    return twin(make_cap(seed, quad), TYPE_I)


def _bricard2(p: dict) -> Twin:
    seed = _kite_pyramid_seed(p)
    quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"), seed.index_of("A'"), seed.index_of("B'"), TYPE_II)
    return twin(make_cap(seed, quad), TYPE_II)


def _twinned_anticupola(p: dict, star: bool = False) -> Twin:
    seed = _anticupola_seed(p, star)
    quad = SymmetricQuad(seed.index_of("A1"), seed.index_of("A2"), seed.index_of("A3"), seed.index_of("A4"), TYPE_I)
    return twin(make_cap(seed, quad), TYPE_I)


# -- crinkles ---------------------------------------------------------------


def _bricard_crinkle(p: dict) -> Crinkle:
    tw = _bricard1(p)
    a = tw.mesh.index_of("A")
    c2 = tw.mesh.index_of("C'")
    return make_crinkle(tw, [(a, c2)])


def _new_crinkle(p: dict) -> Crinkle:
    tw = _twinned_anticupola(p, star=True)
    u = tw.mesh.index_of("C1'")
    v = tw.mesh.index_of("C2'")
    return make_crinkle(tw, [(u, v)])


def _pentagonal_crinkle(p: dict) -> Crinkle:
    tw = _twinned_anticupola(p)
    a1 = tw.mesh.index_of("A1")
    c1 = tw.mesh.index_of("C1")
    c2 = tw.mesh.index_of("C2")
    return make_crinkle(tw, [(c1, a1), (c2, a1)])


# -- assemblies ---------------------------------------------------------------


def _steffen_style(p: dict) -> TriMesh:
    verts = np.array(
        [
            [0.0, 0.0, 0.0],
            [p["hinge_len"], 0.0, 0.0],
            [0.5 * p["hinge_len"], p["r_y"], p["r_z"]],
            [0.5 * p["hinge_len"], p["s_y"], p["s_z"]],
        ]
    )
    faces = orient_faces(verts, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
    tet = TriMesh(verts, faces, {"P": 0, "Q": 1, "R": 2, "S": 3})
    return replace_hinge_with_crinkles(
        tet,
        (0, 1),
        copies=2,
        angles=(p["theta1"], p["theta2"]),
        wing_spread=p["wing_spread"],
        wing_label="T",
    )


def _tetra_chain_base(crinkle: Crinkle, heights) -> TriMesh:
    """Three linked tetrahedral caps over the pentagon, bottoms missing.

    Built on the crinkle's own boundary coordinates, wound opposite to the
    crinkle loop so the two glue into a closed oriented surface; each apex
    sits over its triangle's centroid on the side away from the crinkle body.
    """
    mesh = crinkle.mesh
    a1, a2, a4 = mesh.index_of("A1"), mesh.index_of("A2"), mesh.index_of("A4")
    c1, c2 = mesh.index_of("C1"), mesh.index_of("C2")
    loop = list(crinkle.boundary)
    center = mesh.vertices.mean(axis=0)
    tris = [(c2, a4, a1), (c1, c2, a1), (a2, c1, a1)]
    base_verts = [mesh.vertices[v] for v in loop]
    b_index = {v: i for i, v in enumerate(loop)}
    base_faces = []
    base_labels = {}
    for k, ((x, y, z), h) in enumerate(zip(tris, heights)):
        tc = (mesh.vertices[x] + mesh.vertices[y] + mesh.vertices[z]) / 3.0
        n = np.cross(mesh.vertices[y] - mesh.vertices[x], mesh.vertices[z] - mesh.vertices[x])
        n = n / np.linalg.norm(n)
        if n @ (tc - center) < 0:
            n = -n
        w = len(base_verts)
        base_verts.append(tc + h * n)
        base_labels[f"X{k + 1}"] = w
        bx, by, bz = b_index[x], b_index[y], b_index[z]
        base_faces += [(bx, by, w), (by, bz, w), (bz, bx, w)]
    return TriMesh(np.asarray(base_verts), np.asarray(base_faces, dtype=int), base_labels)


def _tetra_chain(p: dict) -> TriMesh:
    crinkle = _pentagonal_crinkle(p)
    return _tetra_chain_base(crinkle, (p["t1"], p["t2"], p["t3"]))


def _foxtrot(p: dict) -> TriMesh:
    crinkle = _pentagonal_crinkle(p)
    base = _tetra_chain_base(crinkle, (p["t1"], p["t2"], p["t3"]))
    loop = list(crinkle.boundary)
    glued = glue_boundaries(
        Patch(crinkle.mesh, crinkle.boundary),
        Patch(base, tuple(base.boundary_loops()[0])),
        [(loop[i], i) for i in range(5)],
    )
    a1 = glued.index_of("A1")
    c1 = glued.index_of("C1")
    c2 = glued.index_of("C2")
    out = replace_hinge_with_crinkles(glued, (a1, c1), copies=1, angles=(p["theta1"],))
    out = replace_hinge_with_crinkles(out, (a1, c2), copies=1, angles=(p["theta2"],))
    if p["tent_h"] > 0:
        out = _tent_piercings(out, p["tent_h"], max_tents=4)
    return out


def _tent_piercings(mesh: TriMesh, rel_height: float, max_tents: int) -> TriMesh:
    """Erect a tent on each face pierced by a vertex, tallest piercings first.

    Height is relative to the face's own scale. Best effort: faces that stay
    pierced after `max_tents` rounds are left alone."""
    from .collision import vertex_piercings

    for _ in range(max_tents):
        hits = vertex_piercings(mesh)
        if not hits:
            break
        _, face = hits[0]
        height = rel_height * float(np.sqrt(face_areas(mesh)[face]))
        try:
            mesh = erect_tent(mesh, face, height)
        except ConstructionError:
            break
    return mesh


_PYRAMID_PARAMS = (
    Param("ax", 2.0, 0.1, 5.0, "x of corner A (A' is its half-turn image)"),
    Param("ay", -1.0, -5.0, 5.0, "y of corner A"),
    Param("az", -1.0, -5.0, 5.0, "z of corner A"),
    Param("bx", 1.0, -5.0, 5.0, "x of corner B (B' is its half-turn image)"),
    Param("by", 1.5, -5.0, 5.0, "y of corner B"),
    Param("bz", 1.5, -5.0, 5.0, "z of corner B"),
    Param("cx", 0.4, -5.0, 5.0, "apex x; keep the apex off the symmetry axis"),
    Param("cy", 0.2, -5.0, 5.0, "apex y"),
    Param("cz", 2.0, 0.2, 5.0, "apex z"),
)

_KITE_PARAMS = (
    Param("ax", 2.0, 0.1, 5.0, "x of kite tip A"),
    Param("a2x", 2.0, 0.1, 5.0, "negative x of kite tip A'"),
    Param("bx", 1.8, -5.0, 5.0, "x of wing B (B' is its mirror image)"),
    Param("by", -1.5, -5.0, 5.0, "y of wing B"),
    Param("bz", 1.5, 0.1, 5.0, "z of wing B"),
    Param("ex", 0.0, -5.0, 5.0, "apex x"),
    Param("ey", 1.2, -5.0, 5.0, "apex y; keep the apex off the mirror plane"),
    Param("ez", 0.4, 0.05, 5.0, "apex z"),
)

_ANTICUPOLA_PARAMS = (
    Param("base_half", 1.0, 0.2, 3.0, "half-diagonal of the square base"),
    Param("h1", 1.1, 0.2, 3.0, "height of peak C1"),
    Param("h2", 1.0, 0.2, 3.0, "height of peak C2 (above or below the base)"),
    Param("x_off", 0.3, 0.05, 1.0, "peak offset along x"),
    Param("z_off", 0.5, 0.0, 1.0, "peak offset along z"),
)

_STEFFEN_PARAMS = (
    Param("hinge_len", 2.0, 0.5, 4.0, "length of the replaced hinge edge PQ"),
    Param("r_y", 1.6, 0.3, 3.0, "y of tetrahedron corner R"),
    Param("r_z", 0.4, -2.0, 2.0, "z of tetrahedron corner R"),
    Param("s_y", -0.3, -3.0, 3.0, "y of tetrahedron corner S"),
    Param("s_z", 1.5, 0.3, 3.0, "z of tetrahedron corner S"),
    Param("theta1", 0.9, -3.1, 3.1, "axis angle of the first crinkle pocket"),
    Param("theta2", -0.9, -3.1, 3.1, "axis angle of the second (opposing) crinkle pocket"),
    Param("wing_spread", 1.2, 0.3, 3.0, "how far the shared wing vertex sits from the hinge"),
)

_FOXTROT_PARAMS = _ANTICUPOLA_PARAMS + (
    Param("t1", 0.8, 0.2, 2.5, "height of tetrahedral cap X1"),
    Param("t2", 0.8, 0.2, 2.5, "height of tetrahedral cap X2"),
    Param("t3", 0.8, 0.2, 2.5, "height of tetrahedral cap X3"),
    Param("theta1", 0.9, -3.1, 3.1, "axis angle of the crinkle replacing hinge A1-C1"),
    Param("theta2", -0.9, -3.1, 3.1, "axis angle of the crinkle replacing hinge A1-C2"),
    Param("tent_h", 0.0, 0.0, 3.0, "relative tent height over pierced faces (0 = no tents)"),
)

_TETRA_CHAIN_PARAMS = _ANTICUPOLA_PARAMS + (
    Param("t1", 0.8, 0.2, 2.5, "height of tetrahedral cap X1"),
    Param("t2", 0.8, 0.2, 2.5, "height of tetrahedral cap X2"),
    Param("t3", 0.8, 0.2, 2.5, "height of tetrahedral cap X3"),
)


MODELS: dict[str, ModelSpec] = {}


def _register(name, returns, doc, params, builder, driver_labels=None):
    MODELS[name] = ModelSpec(name, returns, doc, params, builder, driver_labels)


_register("pyramid", "mesh", "Closed pyramid over a half-turn-symmetric quad, base split by the diagonal AA'",
          _PYRAMID_PARAMS, _pyramid_seed)
_register("kite_pyramid", "mesh", "Closed pyramid over a mirror-symmetric kite, base split by the diagonal AA'",
          _KITE_PARAMS, _kite_pyramid_seed)
_register("anticupola", "mesh", "Digonal anticupola on a square base (both peaks above), base split by a diagonal",
          _ANTICUPOLA_PARAMS, lambda p: _anticupola_seed(p, star=False))
_register("star_anticupola", "mesh", "Digonal anticupola with its peaks on opposite sides of the base",
          _ANTICUPOLA_PARAMS, lambda p: _anticupola_seed(p, star=True))
_register("bricard1", "twin", "Bricard octahedron of type I: the twinned pyramid",
          _PYRAMID_PARAMS, _bricard1)
_register("bricard2", "twin", "Bricard octahedron of type II: the twinned kite pyramid",
          _KITE_PARAMS, _bricard2)
_register("twinned_anticupola", "twin", "Flexible triangulated dodecahedron: the twinned digonal anticupola",
          _ANTICUPOLA_PARAMS, lambda p: _twinned_anticupola(p, star=False))
_register("star_dodecahedron", "twin", "Star-shaped flexible dodecahedron (peaks on opposite sides); self-intersecting",
          _ANTICUPOLA_PARAMS, lambda p: _twinned_anticupola(p, star=True))
_register("bricard_crinkle", "crinkle", "Bricard octahedron minus the two faces on edge AC'; quad boundary, one phantom pair",
          _PYRAMID_PARAMS, _bricard_crinkle)
_register("new_crinkle", "crinkle", "Star dodecahedron minus the rotated peak edge; lies flat at the default parameters",
          _ANTICUPOLA_PARAMS, _new_crinkle)
_register("pentagonal_crinkle", "crinkle", "Twinned anticupola minus the two peak-to-corner edges; pentagonal boundary, two phantom pairs",
          _ANTICUPOLA_PARAMS, _pentagonal_crinkle)
_register("tetra_chain", "mesh", "Three linked tetrahedral caps over the pentagonal crinkle's boundary, bottoms missing",
          _TETRA_CHAIN_PARAMS, _tetra_chain)
_register("steffen_style", "mesh", "Tetrahedron with one hinge edge swapped for two opposing crinkles around a wing vertex",
          _STEFFEN_PARAMS, _steffen_style, driver_labels=("T", "R"))
_register("foxtrot_template", "mesh", "Pentagonal crinkle glued to three tetrahedral caps, hinges swapped for crinkles, optional tents",
          _FOXTROT_PARAMS, _foxtrot, driver_labels=("A1", "A3"))


def model_names() -> list[str]:
    return sorted(MODELS)


def model_schemas() -> list[dict]:
    return [MODELS[name].schema() for name in model_names()]


def catalog(name: str, params: dict[str, float] | None = None):
    """Build a catalog model; returns a TriMesh, Twin, Cap or Crinkle."""
    spec = MODELS.get(name)
    if spec is None:
        raise CatalogError(f"unknown model {name!r}; available: {', '.join(model_names())}")
    return spec.builder(_resolve(spec, params))


def catalog_mesh(name: str, params: dict[str, float] | None = None) -> TriMesh:
    """The model's underlying mesh, whatever the model type."""
    obj = catalog(name, params)
    return obj.mesh if isinstance(obj, (Twin, Cap, Crinkle)) else obj
