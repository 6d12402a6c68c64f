"""Indexed triangle meshes and the metric quantities built on them.

Points are plain numpy arrays of shape (3,); a mesh stores its vertices as a
read-only (V, 3) float array and its faces as a read-only (F, 3) int array.
Edges are always derived from the face list, never stored, so surgery that
adds or removes faces cannot leave a stale edge set behind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError

# Degeneracy threshold for edge lengths, relative to the bounding-box diameter.
ZERO_EDGE_REL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def bbox_diameter(vertices: np.ndarray) -> float:
    """Diagonal length of the axis-aligned bounding box of a point set."""
    v = np.asarray(vertices, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))


@dataclass(frozen=True)
class TriMesh:
    """Consistently oriented triangulated surface (closed or with boundary).

    Construction validates everything eagerly: face indices in range, no face
    repeating a vertex, every edge shared by at most two faces, and the two
    faces on an interior edge traversing it in opposite directions.
    """

    vertices: np.ndarray
    faces: np.ndarray
    labels: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float)
        faces = np.asarray(self.faces, dtype=int)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise MeshError(f"vertices must be (V, 3), got {verts.shape}")
        if faces.size == 0:
            faces = faces.reshape(0, 3)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError(f"faces must be (F, 3), got {faces.shape}")
        if not np.all(np.isfinite(verts)):
            raise MeshError("vertex coordinates must be finite")
        n = len(verts)
        for fi, f in enumerate(faces):
            if f.min(initial=0) < 0 or f.max(initial=-1) >= n:
                raise MeshError(f"face {fi} has out-of-range vertex index {tuple(f)}")
            if len(set(f.tolist())) != 3:
                raise MeshError(f"face {fi} repeats a vertex index {tuple(f)}")
        for name, idx in self.labels.items():
            if not 0 <= int(idx) < n:
                raise MeshError(f"label {name!r} points at missing vertex {idx}")
        object.__setattr__(self, "vertices", _freeze(verts))
        object.__setattr__(self, "faces", _freeze(faces))
        object.__setattr__(self, "labels", dict(self.labels))
        self._check_edges()

    def _check_edges(self):
        seen: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
        for fi, (i, j, k) in enumerate(self.faces):
            for a, b in ((i, j), (j, k), (k, i)):
                key = (min(a, b), max(a, b))
                seen.setdefault(key, []).append((fi, a, b))
        for (a, b), uses in seen.items():
            if len(uses) > 2:
                raise MeshError(f"edge ({a},{b}) lies on {len(uses)} faces; surface is non-manifold")
            if len(uses) == 2 and uses[0][1] == uses[1][1]:
                f1, f2 = uses[0][0], uses[1][0]
                raise MeshError(
                    f"faces {f1} and {f2} traverse edge ({a},{b}) in the same direction; "
                    "orientation is inconsistent"
                )
        object.__setattr__(self, "_edge_uses", seen)

    # -- derived topology ------------------------------------------------

    def edges(self) -> np.ndarray:
        """Undirected edges as a sorted (E, 2) int array."""
        return np.array(sorted(self._edge_uses.keys()), dtype=int).reshape(-1, 2)

    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        """Map undirected edge -> indices of its incident faces (1 or 2)."""
        return {e: [u[0] for u in uses] for e, uses in self._edge_uses.items()}

    def boundary_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, uses in self._edge_uses.items() if len(uses) == 1)

    def boundary_loops(self) -> list[list[int]]:
        """Boundary cycles, ordered the way the incident faces traverse them.

        A boundary edge is traversed exactly once by its face, as a->b; loops
        follow that direction, so a hole reads like the rim of the surface
        around it.
        """
        succ: dict[int, int] = {}
        for uses in self._edge_uses.values():
            if len(uses) == 1:
                _, a, b = uses[0]
                if a in succ:
                    raise MeshError(f"boundary is not a disjoint union of cycles at vertex {a}")
                succ[a] = b
        loops = []
        remaining = dict(succ)
        while remaining:
            start = min(remaining)
            loop = [start]
            cur = remaining.pop(start)
            while cur != start:
                loop.append(cur)
                cur = remaining.pop(cur)
            loops.append(loop)
        return loops

    def is_closed(self) -> bool:
        return not self.boundary_edges()

    def face_adjacency(self) -> list[list[int]]:
        """Faces sharing an edge, as an adjacency list."""
        adj: list[list[int]] = [[] for _ in range(len(self.faces))]
        for uses in self._edge_uses.values():
            if len(uses) == 2:
                f1, f2 = uses[0][0], uses[1][0]
                adj[f1].append(f2)
                adj[f2].append(f1)
        return adj

    # -- convenience -----------------------------------------------------

    def label_of(self, index: int) -> str | None:
        for name, i in self.labels.items():
            if i == index:
                return name
        return None

    def index_of(self, name: str) -> int:
        try:
            return self.labels[name]
        except KeyError:
            raise MeshError(f"mesh has no vertex labelled {name!r}") from None

    def with_vertices(self, coords: np.ndarray) -> "TriMesh":
        """Same topology at new coordinates (a frame of a flexing motion)."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != self.vertices.shape:
            raise MeshError(f"coordinate array {coords.shape} does not match mesh {self.vertices.shape}")
        return TriMesh(coords, self.faces, self.labels)


@dataclass(frozen=True)
class MeshStats:
    V: int
    E: int
    F: int
    euler_characteristic: int
    is_closed: bool
    is_triangulated_sphere: bool


def mesh_stats(mesh: TriMesh) -> MeshStats:
    """Count vertices/edges/faces and classify the surface."""
    V = len(mesh.vertices)
    E = len(mesh._edge_uses)
    F = len(mesh.faces)
    chi = V - E + F
    closed = mesh.is_closed()
    sphere = closed and chi == 2 and 3 * F == 2 * E
    return MeshStats(V, E, F, chi, closed, sphere)


def edge_lengths(mesh: TriMesh, coords: np.ndarray | None = None) -> dict[tuple[int, int], float]:
    """Euclidean length of every derived edge; rejects degenerate edges."""
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    tol = ZERO_EDGE_REL * bbox_diameter(pts)
    out = {}
    for a, b in mesh.edges():
        d = float(np.linalg.norm(pts[a] - pts[b]))
        if d <= tol:
            raise MeshError(f"edge ({a},{b}) has zero length")
        out[(int(a), int(b))] = d
    return out


def signed_volume(mesh: TriMesh, coords: np.ndarray | None = None) -> float:
    """Signed enclosed volume of a closed oriented mesh.

    Sum of signed tetrahedra against the origin; origin-independent because
    the surface is closed. Orientation consistency is already enforced at
    construction, so only closedness is checked here.
    """
    if not mesh.is_closed():
        raise MeshError("signed volume requires a closed mesh")
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    p0 = pts[mesh.faces[:, 0]]
    p1 = pts[mesh.faces[:, 1]]
    p2 = pts[mesh.faces[:, 2]]
    return float(np.einsum("ij,ij->i", p0, np.cross(p1, p2)).sum() / 6.0)


def face_normals(mesh: TriMesh, coords: np.ndarray | None = None, normalize: bool = True) -> np.ndarray:
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    p0 = pts[mesh.faces[:, 0]]
    n = np.cross(pts[mesh.faces[:, 1]] - p0, pts[mesh.faces[:, 2]] - p0)
    if normalize:
        norms = np.linalg.norm(n, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        n = n / norms
    return n


def face_areas(mesh: TriMesh, coords: np.ndarray | None = None) -> np.ndarray:
    return 0.5 * np.linalg.norm(face_normals(mesh, coords, normalize=False), axis=1)


def flip_orientation(mesh: TriMesh) -> TriMesh:
    return TriMesh(mesh.vertices, mesh.faces[:, ::-1], mesh.labels)


def procrustes_residual(X: np.ndarray, Y: np.ndarray) -> float:
    """RMS gap between point sets after the best rigid alignment of X onto Y.

    Rotations only (no reflections), found from the cross-covariance SVD.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    cx, cy = X.mean(axis=0), Y.mean(axis=0)
    A = (Y - cy).T @ (X - cx)
    u, _, vt = np.linalg.svd(A)
    d = np.sign(np.linalg.det(u @ vt))
    R = u @ np.diag([1.0, 1.0, d][: A.shape[0]]) @ vt
    aligned = (X - cx) @ R.T + cy
    return float(np.sqrt(np.mean(np.sum((aligned - Y) ** 2, axis=1))))


def orient_faces(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Flip faces so shared edges are traversed oppositely; outward if closed.

    Propagates the first face's orientation across the face-adjacency graph,
    then, for a closed surface, flips everything if the signed volume came
    out negative. Raises for non-orientable input.
    """
    faces = [list(map(int, f)) for f in np.asarray(faces, dtype=int)]
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fi, (i, j, k) in enumerate(faces):
        for a, b in ((i, j), (j, k), (k, i)):
            edge_faces.setdefault((min(a, b), max(a, b)), []).append(fi)

    def directed(fi):
        i, j, k = faces[fi]
        return {(i, j), (j, k), (k, i)}

    fixed = {0} if faces else set()
    stack = [0] if faces else []
    while stack:
        fi = stack.pop()
        for a, b in directed(fi):
            key = (min(a, b), max(a, b))
            for gi in edge_faces[key]:
                if gi == fi:
                    continue
                same_dir = (a, b) in directed(gi)
                if gi in fixed:
                    if same_dir:
                        raise MeshError("surface is non-orientable")
                    continue
                if same_dir:
                    faces[gi] = faces[gi][::-1]
                fixed.add(gi)
                stack.append(gi)
    if len(fixed) != len(faces):
        raise MeshError("orient_faces requires an edge-connected face set")

    out = np.asarray(faces, dtype=int).reshape(-1, 3)
    boundary = any(len(v) == 1 for v in edge_faces.values())
    if not boundary and len(out):
        pts = np.asarray(vertices, dtype=float)
        vol = np.einsum(
            "ij,ij->i", pts[out[:, 0]], np.cross(pts[out[:, 1]], pts[out[:, 2]])
        ).sum() / 6.0
        if vol < 0:
            out = out[:, ::-1]
    return out
