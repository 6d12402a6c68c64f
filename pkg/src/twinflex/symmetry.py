"""Symmetric quadrilaterals and the isometries that swap their vertices.

A quadrilateral A, B, A', B' with opposite sides equal (|AB| = |A'B'| and
|AB'| = |A'B|) admits a half-rotation about a line exchanging A with A' and
B with B'; one with adjacent sides equal at two opposite corners (|AB| = |AB'|
and |A'B| = |A'B'|) admits a reflection fixing A, A' and swapping B, B'.
These are the two symmetry kinds the twinning construction glues along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SymmetryError
from .geometry import TriMesh

TYPE_I = "I"
TYPE_II = "II"

# Relative tolerance for detecting length equalities in meshes.
DEFAULT_SYM_TOL = 1e-9

# Below this fraction of the quad diameter, midpoints X and Y are treated as
# coincident and the planar-parallelogram branch is taken.
COINCIDENT_MIDPOINT_REL = 1e-10


@dataclass(frozen=True)
class SymmetricQuad:
    """Vertex indices a, b, a_prime, b_prime of a symmetric quad in a mesh."""

    a: int
    b: int
    a_prime: int
    b_prime: int
    kind: str

    def indices(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.a_prime, self.b_prime)


@dataclass(frozen=True)
class SymmetryLine:
    point: np.ndarray
    direction: np.ndarray

    def to_dict(self) -> dict:
        return {"kind": "line", "point": self.point.tolist(), "direction": self.direction.tolist()}


@dataclass(frozen=True)
class SymmetryPlane:
    point: np.ndarray
    normal: np.ndarray

    def to_dict(self) -> dict:
        return {"kind": "plane", "point": self.point.tolist(), "normal": self.normal.tolist()}


def _canonical_direction(d: np.ndarray) -> np.ndarray:
    """Unit vector with a lexicographically positive leading component."""
    d = d / np.linalg.norm(d)
    for comp in d:
        if abs(comp) > 1e-14:
            return d if comp > 0 else -d
    raise SymmetryError("zero direction vector")


def apply_half_rotation(line: SymmetryLine, points: np.ndarray) -> np.ndarray:
    """Rotate points 180 degrees about the line (an involution)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rel = pts - line.point
    out = line.point + 2.0 * np.outer(rel @ line.direction, line.direction) - rel
    return out if np.asarray(points).ndim > 1 else out[0]


def apply_reflection(plane: SymmetryPlane, points: np.ndarray) -> np.ndarray:
    """Mirror points in the plane (an involution)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = pts - 2.0 * np.outer((pts - plane.point) @ plane.normal, plane.normal)
    return out if np.asarray(points).ndim > 1 else out[0]


def _quad_arrays(quad_coords) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    q = np.asarray(quad_coords, dtype=float)
    if q.shape != (4, 3):
        raise SymmetryError(f"expected 4 points, got array of shape {q.shape}")
    return q[0], q[1], q[2], q[3]


def _side_lengths(a, b, a2, b2) -> tuple[float, float, float, float]:
    return (
        float(np.linalg.norm(a - b)),
        float(np.linalg.norm(b - a2)),
        float(np.linalg.norm(a2 - b2)),
        float(np.linalg.norm(b2 - a)),
    )


def is_type1(quad_coords, tol: float = DEFAULT_SYM_TOL) -> bool:
    ab, ba2, a2b2, b2a = _side_lengths(*_quad_arrays(quad_coords))
    scale = (ab + ba2 + a2b2 + b2a) / 4.0
    return abs(ab - a2b2) <= tol * scale and abs(b2a - ba2) <= tol * scale


def is_type2(quad_coords, tol: float = DEFAULT_SYM_TOL) -> bool:
    ab, ba2, a2b2, b2a = _side_lengths(*_quad_arrays(quad_coords))
    scale = (ab + ba2 + a2b2 + b2a) / 4.0
    return abs(ab - b2a) <= tol * scale and abs(ba2 - a2b2) <= tol * scale


def _verify_atol(scale: float, tol: float) -> float:
    return min(1e3 * max(tol, 1e-12) * scale, 0.1 * scale)


def symmetry_line(quad_coords, tol: float = DEFAULT_SYM_TOL) -> SymmetryLine:
    """Axis of the half-rotation swapping A<->A' and B<->B'.

    Through the midpoints of the diagonals when they differ; perpendicular to
    the quad's plane through the shared midpoint in the planar-parallelogram
    case, where the two midpoints coincide.
    """
    a, b, a2, b2 = _quad_arrays(quad_coords)
    if not is_type1(quad_coords, tol):
        raise SymmetryError("opposite side lengths differ; quad has no half-rotation symmetry")
    diffs = np.asarray(quad_coords) - np.asarray(quad_coords).mean(axis=0)
    diam = 2.0 * float(np.linalg.norm(diffs, axis=1).max())
    if diam == 0.0:
        raise SymmetryError("all four points coincide")

    x = 0.5 * (a + a2)
    y = 0.5 * (b + b2)
    if np.linalg.norm(y - x) > COINCIDENT_MIDPOINT_REL * diam:
        direction = _canonical_direction(y - x)
    else:
        n = np.cross(a2 - a, b2 - b)
        if np.linalg.norm(n) <= 1e-12 * diam * diam:
            raise SymmetryError("four collinear points; symmetry line is undefined")
        direction = _canonical_direction(n)

    line = SymmetryLine(point=x, direction=direction)
    sent = apply_half_rotation(line, np.array([a, b]))
    atol = _verify_atol(diam, tol)
    if np.linalg.norm(sent[0] - a2) > atol or np.linalg.norm(sent[1] - b2) > atol:
        raise SymmetryError("computed line fails to swap the quad's vertex pairs")
    return line


def symmetry_plane(quad_coords, tol: float = DEFAULT_SYM_TOL) -> SymmetryPlane:
    """Mirror plane fixing A and A' and swapping B with B'.

    The length conditions put A and A' on the perpendicular bisector plane of
    BB', so that plane is returned; if B and B' coincide the swap is the
    identity and the plane through A, A', B is used instead.
    """
    a, b, a2, b2 = _quad_arrays(quad_coords)
    if not is_type2(quad_coords, tol):
        raise SymmetryError("adjacent side lengths differ; quad has no mirror symmetry")
    diffs = np.asarray(quad_coords) - np.asarray(quad_coords).mean(axis=0)
    diam = 2.0 * float(np.linalg.norm(diffs, axis=1).max())
    if np.linalg.norm(a2 - a) <= 1e-12 * diam:
        raise SymmetryError("A and A' coincide; mirror plane is undefined")

    if np.linalg.norm(b - b2) > COINCIDENT_MIDPOINT_REL * diam:
        point = 0.5 * (b + b2)
        normal = _canonical_direction(b - b2)
    else:
        n = np.cross(a2 - a, b - a)
        if np.linalg.norm(n) <= 1e-12 * diam * diam:
            # A, A', B collinear: any plane containing the line works
            axis = a2 - a
            probe = np.zeros(3)
            probe[int(np.argmin(np.abs(axis)))] = 1.0
            n = np.cross(axis, probe)
        point = a
        normal = _canonical_direction(n)

    plane = SymmetryPlane(point=point, normal=normal)
    sent = apply_reflection(plane, np.array([a, a2, b]))
    atol = _verify_atol(diam, tol)
    if (
        np.linalg.norm(sent[0] - a) > atol
        or np.linalg.norm(sent[1] - a2) > atol
        or np.linalg.norm(sent[2] - b2) > atol
    ):
        raise SymmetryError("computed plane fails to fix A, A' and swap B, B'")
    return plane


def quad_isometry(quad_coords, kind: str, tol: float = DEFAULT_SYM_TOL):
    """The symmetry transform of the quad: a SymmetryLine or SymmetryPlane."""
    if kind == TYPE_I:
        return symmetry_line(quad_coords, tol)
    if kind == TYPE_II:
        return symmetry_plane(quad_coords, tol)
    raise SymmetryError(f"unknown symmetry kind {kind!r}")


def apply_isometry(iso, points: np.ndarray) -> np.ndarray:
    if isinstance(iso, SymmetryLine):
        return apply_half_rotation(iso, points)
    if isinstance(iso, SymmetryPlane):
        return apply_reflection(iso, points)
    raise SymmetryError(f"not an isometry: {iso!r}")


def find_symmetric_quads(mesh: TriMesh, tol: float = DEFAULT_SYM_TOL) -> list[SymmetricQuad]:
    """Interior edges AA' whose two incident triangles form a symmetric quad.

    The tolerance is relative to the quad's mean side length. An edge whose
    quad satisfies both kinds appears twice, once per kind.
    """
    hits = []
    pts = mesh.vertices
    for (a, a2), fids in sorted(mesh.edge_faces().items()):
        if len(fids) != 2:
            continue
        opp = []
        for fi in fids:
            (v,) = set(mesh.faces[fi].tolist()) - {a, a2}
            opp.append(v)
        b, b2 = opp
        if b == b2:
            continue
        coords = pts[[a, b, a2, b2]]
        if is_type1(coords, tol):
            hits.append(SymmetricQuad(a, b, a2, b2, TYPE_I))
        if is_type2(coords, tol):
            hits.append(SymmetricQuad(a, b, a2, b2, TYPE_II))
    return hits
