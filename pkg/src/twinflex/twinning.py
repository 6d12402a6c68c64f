"""The twinning construction and its surgery operations.

Removing an interior edge AA' from a closed rigid polyhedron leaves a cap
over the quadrilateral hole ABA'B'. When that quadrilateral is symmetric, a
copy of the cap can be carried across by the symmetry isometry and glued back
along the boundary, producing a closed polyhedron with a single flex. This
module builds caps, twins, and crinkles, and performs the intersection-removal
surgeries (tents, hinge-to-crinkle swaps, boundary gluing).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, DoubleCoverError, MeshError
from .geometry import TriMesh, bbox_diameter, face_normals, mesh_stats, signed_volume
from .symmetry import (
    TYPE_I,
    TYPE_II,
    SymmetricQuad,
    SymmetryLine,
    apply_half_rotation,
    apply_isometry,
    quad_isometry,
)

GLUE_LENGTH_TOL = 1e-9


def _faces_connected(faces: np.ndarray) -> bool:
    """True when the faces form one edge-connected component."""
    if len(faces) == 0:
        return True
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fi, (i, j, k) in enumerate(faces):
        for a, b in ((i, j), (j, k), (k, i)):
            edge_faces.setdefault((min(a, b), max(a, b)), []).append(fi)
    adj: list[set[int]] = [set() for _ in range(len(faces))]
    for fids in edge_faces.values():
        for x in fids:
            for y in fids:
                if x != y:
                    adj[x].add(y)
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(faces)


@dataclass(frozen=True)
class Cap:
    """Open surface with one boundary loop, the result of removing an edge."""

    mesh: TriMesh
    boundary: tuple[int, ...]

    def __post_init__(self):
        loops = self.mesh.boundary_loops()
        if len(loops) != 1:
            raise ConstructionError(f"cap must have exactly one boundary loop, found {len(loops)}")
        loop = loops[0]
        if len(loop) != len(self.boundary) or set(loop) != set(self.boundary):
            raise ConstructionError("declared boundary does not match the mesh's boundary loop")
        object.__setattr__(self, "boundary", tuple(int(v) for v in self.boundary))

    def boundary_coords(self) -> np.ndarray:
        return self.mesh.vertices[list(self.boundary)]


@dataclass(frozen=True)
class Crinkle:
    """Disk-topology flexible surface with phantom vertex pairs.

    A phantom pair is a removed edge: no bar connects the two vertices, yet
    their distance stays fixed along the surface's flex.
    """

    mesh: TriMesh
    boundary: tuple[int, ...]
    phantom_pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        st = mesh_stats(self.mesh)
        if st.euler_characteristic != 1:
            raise ConstructionError(
                f"crinkle must be a disk (chi=1), got chi={st.euler_characteristic}"
            )
        loops = self.mesh.boundary_loops()
        if len(loops) != 1:
            raise ConstructionError(f"crinkle must have one boundary loop, found {len(loops)}")
        if not _faces_connected(self.mesh.faces):
            raise ConstructionError("crinkle faces are disconnected")
        edges = {tuple(e) for e in self.mesh.edges().tolist()}
        pairs = []
        for u, v in self.phantom_pairs:
            key = (min(int(u), int(v)), max(int(u), int(v)))
            if key in edges:
                raise ConstructionError(f"phantom pair {key} is an actual edge of the mesh")
            pairs.append(key)
        object.__setattr__(self, "phantom_pairs", tuple(pairs))
        object.__setattr__(self, "boundary", tuple(int(v) for v in self.boundary))

    def phantom_distances(self, coords: np.ndarray | None = None) -> list[float]:
        pts = self.mesh.vertices if coords is None else np.asarray(coords, dtype=float)
        return [float(np.linalg.norm(pts[u] - pts[v])) for u, v in self.phantom_pairs]


@dataclass(frozen=True)
class Twin:
    """Closed polyhedron glued from a cap and its isometric copy.

    `equator` is the shared boundary quad (a, b, a', b'); `pairing` maps every
    non-equator vertex to its copy (in both directions). The construction
    isometry is re-derived from the current equator coordinates whenever a
    flexed frame is checked, but the combinatorial pairing never changes.
    """

    mesh: TriMesh
    equator: tuple[int, ...]
    pairing: dict[int, int]
    kind: str

    def __post_init__(self):
        st = mesh_stats(self.mesh)
        if not st.is_triangulated_sphere:
            raise ConstructionError("twin must be a closed triangulated sphere")
        if self.kind not in (TYPE_I, TYPE_II):
            raise ConstructionError(f"unknown twin kind {self.kind!r}")
        eq = tuple(int(v) for v in self.equator)
        pairing = {int(k): int(v) for k, v in self.pairing.items()}
        for v, w in pairing.items():
            if pairing.get(w) != v:
                raise ConstructionError(f"pairing is not an involution at vertex {v}")
            if v in eq or w in eq:
                raise ConstructionError("equator vertices must not appear in the pairing")
        expected = set(range(len(self.mesh.vertices))) - set(eq)
        if set(pairing) != expected:
            raise ConstructionError("pairing must cover exactly the non-equator vertices")
        object.__setattr__(self, "equator", eq)
        object.__setattr__(self, "pairing", pairing)

    def vertex_permutation(self) -> np.ndarray:
        """Full vertex permutation induced by the construction isometry."""
        perm = np.arange(len(self.mesh.vertices))
        for v, w in self.pairing.items():
            perm[v] = w
        a, b, a2, b2 = self.equator
        perm[b], perm[b2] = b2, b
        if self.kind == TYPE_I:
            perm[a], perm[a2] = a2, a
        return perm

    def equator_coords(self, coords: np.ndarray | None = None) -> np.ndarray:
        pts = self.mesh.vertices if coords is None else np.asarray(coords, dtype=float)
        return pts[list(self.equator)]

    def diagonal_length(self, coords: np.ndarray | None = None) -> float:
        """Length of the removed diagonal AA' at the given frame."""
        q = self.equator_coords(coords)
        return float(np.linalg.norm(q[0] - q[2]))


def make_cap(mesh: TriMesh, quad: SymmetricQuad) -> Cap:
    """Remove the edge AA' (and its two faces) to open a quadrilateral hole."""
    if not mesh.is_closed():
        raise ConstructionError("cap construction expects a closed mesh")
    a, b, a2, b2 = quad.indices()
    key = (min(a, a2), max(a, a2))
    fids = mesh.edge_faces().get(key)
    if fids is None or len(fids) != 2:
        raise ConstructionError(f"({a},{a2}) is not an interior edge")
    opposite = set()
    for fi in fids:
        opposite |= set(mesh.faces[fi].tolist()) - {a, a2}
    if opposite != {b, b2}:
        raise ConstructionError(
            f"faces on edge ({a},{a2}) have third vertices {sorted(opposite)}, "
            f"not the declared ({b},{b2})"
        )
    keep = [f for i, f in enumerate(mesh.faces.tolist()) if i not in fids]
    if not _faces_connected(np.asarray(keep)):
        raise ConstructionError(f"removing edge ({a},{a2}) disconnects the surface")
    open_mesh = TriMesh(mesh.vertices, np.asarray(keep, dtype=int), mesh.labels)
    loop = open_mesh.boundary_loops()[0]
    start = loop.index(a)
    loop = loop[start:] + loop[:start]
    return Cap(mesh=open_mesh, boundary=tuple(loop))


def _fresh_label(labels: dict[str, int], base: str) -> str:
    name = base + "'"
    while name in labels:
        name += "'"
    return name


def twin(cap: Cap, kind: str, tol: float = 1e-9) -> Twin:
    """Glue the cap to its rotated (type I) or reflected (type II) copy."""
    if len(cap.boundary) != 4:
        raise ConstructionError("twinning is implemented for quadrilateral boundaries")
    quad = cap.boundary_coords()
    iso = quad_isometry(quad, kind, tol)

    a, b, a2, b2 = cap.boundary
    if kind == TYPE_I:
        boundary_map = {a: a2, a2: a, b: b2, b2: b}
    else:
        boundary_map = {a: a, a2: a2, b: b2, b2: b}

    pts = cap.mesh.vertices
    interior = [v for v in range(len(pts)) if v not in cap.boundary]
    if not interior:
        raise ConstructionError("cap has no interior vertices to copy")
    moved = apply_isometry(iso, pts[interior])

    # a cap already symmetric under its own boundary isometry only double-covers
    diam = bbox_diameter(pts)
    interior_pts = pts[interior]
    covered = all(
        np.linalg.norm(interior_pts - m, axis=1).min() < 1e-9 * diam for m in np.atleast_2d(moved)
    )
    if covered:
        raise DoubleCoverError(
            "cap is symmetric under the boundary isometry; twinning would double-cover it"
        )

    copy_index = {v: len(pts) + k for k, v in enumerate(interior)}
    vertices = np.vstack([pts, np.atleast_2d(moved)])

    def send(v: int) -> int:
        return boundary_map.get(v, copy_index.get(v, v))

    new_faces = []
    for i, j, k in cap.mesh.faces.tolist():
        f = (send(i), send(j), send(k))
        if kind == TYPE_I:
            f = f[::-1]
        new_faces.append(f)
    faces = np.vstack([cap.mesh.faces, np.asarray(new_faces, dtype=int)])

    labels = dict(cap.mesh.labels)
    for v in interior:
        base = cap.mesh.label_of(v)
        if base is not None:
            labels[_fresh_label(labels, base)] = copy_index[v]

    mesh = TriMesh(vertices, faces, labels)
    pairing = {}
    for v in interior:
        pairing[v] = copy_index[v]
        pairing[copy_index[v]] = v
    tw = Twin(mesh=mesh, equator=cap.boundary, pairing=pairing, kind=kind)

    if kind == TYPE_I:
        vol = abs(signed_volume(mesh))
        if vol > 1e-8 * bbox_diameter(vertices) ** 3:
            raise ConstructionError(f"type I twin has non-zero volume {vol:g}; construction is broken")
    return tw


def make_crinkle(source: Twin | TriMesh, remove_edges) -> Crinkle:
    """Remove interior edges (with their faces); removed edges become phantoms."""
    mesh = source.mesh if isinstance(source, Twin) else source
    edge_faces = mesh.edge_faces()
    removed_faces: set[int] = set()
    phantoms = []
    for u, v in remove_edges:
        key = (min(int(u), int(v)), max(int(u), int(v)))
        fids = edge_faces.get(key)
        if fids is None:
            raise ConstructionError(f"({u},{v}) is not an edge of the mesh")
        if len(fids) != 2:
            raise ConstructionError(f"({u},{v}) is a boundary edge; cannot remove it")
        removed_faces |= set(fids)
        phantoms.append(key)
    keep = [f for i, f in enumerate(mesh.faces.tolist()) if i not in removed_faces]
    if not _faces_connected(np.asarray(keep)):
        raise ConstructionError("edge removal disconnects the surface")
    reduced = TriMesh(mesh.vertices, np.asarray(keep, dtype=int), mesh.labels)
    st = mesh_stats(reduced)
    loops = reduced.boundary_loops()
    if st.euler_characteristic != 1 or len(loops) != 1:
        raise ConstructionError(
            f"edge removal leaves chi={st.euler_characteristic} with {len(loops)} boundary "
            "loops; not a disk"
        )
    return Crinkle(mesh=reduced, boundary=tuple(loops[0]), phantom_pairs=tuple(phantoms))


def erect_tent(mesh: TriMesh, face: int, height: float) -> TriMesh:
    """Replace a face by a cone to a new apex on its normal at the centroid.

    Adds one vertex, three edges and two faces; existing vertex indices and
    all existing edge lengths are untouched.
    """
    if not 0 <= face < len(mesh.faces):
        raise ConstructionError(f"face index {face} out of range")
    if height == 0:
        raise ConstructionError("tent height must be non-zero")
    i, j, k = mesh.faces[face].tolist()
    centroid = mesh.vertices[[i, j, k]].mean(axis=0)
    normal = face_normals(mesh)[face]
    apex = centroid + height * normal
    apex_idx = len(mesh.vertices)
    vertices = np.vstack([mesh.vertices, apex[None, :]])
    new_faces = [f for fi, f in enumerate(mesh.faces.tolist()) if fi != face]
    new_faces += [[i, j, apex_idx], [j, k, apex_idx], [k, i, apex_idx]]
    return TriMesh(vertices, np.asarray(new_faces, dtype=int), mesh.labels)


def _loop_edge_lengths(pts: np.ndarray, loop) -> list[float]:
    n = len(loop)
    return [float(np.linalg.norm(pts[loop[i]] - pts[loop[(i + 1) % n]])) for i in range(n)]


def glue_boundaries(a, b, correspondence, tol: float = GLUE_LENGTH_TOL) -> TriMesh:
    """Merge two open surfaces along matching boundary loops.

    `correspondence` is a list of (vertex_in_a, vertex_in_b) pairs covering
    both boundary loops. Walking a's loop forward must walk b's loop backward
    (opposite traversal keeps the glued surface consistently oriented), and
    corresponding boundary edges must have equal lengths within `tol`
    relative. Vertices are merged by the correspondence, never by proximity.
    """
    mesh_a, mesh_b = a.mesh, b.mesh
    loop_a, loop_b = list(a.boundary), list(b.boundary)
    pairs = [(int(x), int(y)) for x, y in correspondence]
    to_b = dict(pairs)
    if len(to_b) != len(pairs) or len(set(to_b.values())) != len(pairs):
        raise ConstructionError("correspondence must be a bijection")
    if set(to_b) != set(loop_a) or set(to_b.values()) != set(loop_b):
        raise ConstructionError("correspondence must cover both boundary loops exactly")
    n = len(loop_a)
    if n != len(loop_b):
        raise ConstructionError(f"boundary loops have different lengths ({n} vs {len(loop_b)})")

    # walking a forward must walk b backward
    image = [to_b[v] for v in loop_a]
    start = loop_b.index(image[0])
    backward = [loop_b[(start - i) % n] for i in range(n)]
    if image != backward:
        forward = [loop_b[(start + i) % n] for i in range(n)]
        if image == forward:
            raise ConstructionError(
                "correspondence walks both loops in the same direction; orientation mismatch"
            )
        raise ConstructionError("correspondence does not follow the boundary loops")

    scale = max(_loop_edge_lengths(mesh_a.vertices, loop_a))
    for i in range(n):
        u, v = loop_a[i], loop_a[(i + 1) % n]
        la = np.linalg.norm(mesh_a.vertices[u] - mesh_a.vertices[v])
        lb = np.linalg.norm(mesh_b.vertices[to_b[u]] - mesh_b.vertices[to_b[v]])
        if abs(la - lb) > tol * scale:
            raise ConstructionError(
                f"boundary edge ({u},{v}) has length {la:.12g} but its partner has {lb:.12g}"
            )

    from_b = {w: v for v, w in to_b.items()}
    remap = {}
    extra = []
    next_idx = len(mesh_a.vertices)
    for w in range(len(mesh_b.vertices)):
        if w in from_b:
            remap[w] = from_b[w]
        else:
            remap[w] = next_idx
            extra.append(mesh_b.vertices[w])
            next_idx += 1
    vertices = np.vstack([mesh_a.vertices] + ([np.asarray(extra)] if extra else []))
    faces_b = [[remap[i], remap[j], remap[k]] for i, j, k in mesh_b.faces.tolist()]
    faces = np.vstack([mesh_a.faces, np.asarray(faces_b, dtype=int)])

    labels = dict(mesh_a.labels)
    for name, w in mesh_b.labels.items():
        tgt = remap[w]
        if name in labels and labels[name] != tgt:
            name = _fresh_label(labels, name)
        labels.setdefault(name, tgt)
    return TriMesh(vertices, faces, labels)


@dataclass(frozen=True)
class Patch:
    """A mesh with one of its boundary loops singled out for gluing."""

    mesh: TriMesh
    boundary: tuple[int, ...]


def fit_bricard_crinkle(quad_coords, angle: float = 0.0) -> Crinkle:
    """Bricard crinkle whose boundary is the given quad, phantom on its P0-P2 diagonal.

    The crinkle is the symmetric octahedron over the quad minus the two faces
    on the diagonal: the half-rotation axis must send P1 to P3, which leaves a
    one-parameter family of axes through the midpoint of P1P3 perpendicular
    to it; `angle` selects the axis direction within that disk. Every choice
    yields a valid crinkle; the angle controls where the two new vertices (the
    pyramid apex and the carried copy of P0) end up.
    """
    P = np.asarray(quad_coords, dtype=float).reshape(4, 3)
    p0, p1, p2, p3 = P
    u = p3 - p1
    nu = float(np.linalg.norm(u))
    diam = bbox_diameter(P)
    if nu < 1e-12 * diam:
        raise ConstructionError("P1 and P3 coincide; crinkle axis family is undefined")
    u = u / nu
    probe = np.zeros(3)
    probe[int(np.argmin(np.abs(u)))] = 1.0
    e1 = np.cross(u, probe)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    axis = SymmetryLine(point=0.5 * (p1 + p3), direction=np.cos(angle) * e1 + np.sin(angle) * e2)

    a2 = apply_half_rotation(axis, p0)
    c = apply_half_rotation(axis, p2)
    verts = np.array([p0, p1, a2, p3, c, p2])
    for i in range(6):
        for j in range(i + 1, 6):
            if np.linalg.norm(verts[i] - verts[j]) < 1e-9 * diam:
                raise ConstructionError(
                    f"crinkle angle {angle:g} makes vertices {i} and {j} coincide; pick another angle"
                )
    faces = np.array([(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4), (2, 1, 5), (3, 2, 5)])
    mesh = TriMesh(verts, faces)
    return Crinkle(mesh=mesh, boundary=tuple(mesh.boundary_loops()[0]), phantom_pairs=((0, 5),))


def _hole_after_removing_edge(mesh: TriMesh, hinge) -> tuple[TriMesh, list[int]]:
    u, v = (int(x) for x in hinge)
    key = (min(u, v), max(u, v))
    fids = mesh.edge_faces().get(key)
    if fids is None or len(fids) != 2:
        raise ConstructionError(f"({u},{v}) is not an interior edge")
    keep = [f for i, f in enumerate(mesh.faces.tolist()) if i not in fids]
    reduced = TriMesh(mesh.vertices, np.asarray(keep, dtype=int), mesh.labels)
    hole = None
    for loop in reduced.boundary_loops():
        if len(loop) == 4 and u in loop and v in loop:
            hole = loop
            break
    if hole is None:
        raise ConstructionError(f"removing edge ({u},{v}) does not open a quadrilateral hole")
    start = hole.index(u)
    hole = hole[start:] + hole[:start]
    if hole[2] != v:
        raise ConstructionError(f"hole around ({u},{v}) is not spanned by the hinge diagonal")
    return reduced, hole


def _glue_crinkle_into_hole(reduced: TriMesh, hole: list[int], angle: float) -> TriMesh:
    """Fill the quad hole (face-traversal loop) with a fitted Bricard crinkle."""
    quad = reduced.vertices[hole]
    crinkle = fit_bricard_crinkle(quad, angle)
    # the fitted crinkle walks its boundary the same way the hole rim does;
    # flip it so the glued surface stays consistently oriented
    flipped = TriMesh(crinkle.mesh.vertices, crinkle.mesh.faces[:, ::-1])
    crinkle_loop = [0, 1, 5, 3]  # (P0, P1, P2, P3) slots in the fitted mesh
    correspondence = [(hole[i], crinkle_loop[i]) for i in range(4)]
    patch = Patch(mesh=flipped, boundary=tuple(reversed(crinkle_loop)))
    return glue_boundaries(Patch(reduced, tuple(hole)), patch, correspondence)


def replace_hinge_with_crinkles(
    mesh: TriMesh,
    hinge,
    copies: int = 2,
    angles=(0.0, 0.0),
    wing=None,
    wing_spread: float = 1.0,
    wing_label: str | None = None,
) -> TriMesh:
    """Swap an interior hinge edge for one or two opposing Bricard crinkles.

    The hinge's two faces are removed, opening the quad corridor (u, w1, v,
    w2). With `copies=1` a single crinkle fills it, its phantom pair spanning
    the former hinge (u, v). With `copies=2` a new wing vertex t splits the
    corridor into (u, w1, v, t) and (u, t, v, w2), each filled by a crinkle
    whose phantom spans (u, v); `wing` places t explicitly, defaulting to the
    point opposite the removed faces' centroids, `wing_spread` away.

    Existing vertex indices and edge lengths are untouched; the hinge edge is
    absent from the result.
    """
    if copies not in (1, 2):
        raise ConstructionError("copies must be 1 or 2")
    reduced, hole = _hole_after_removing_edge(mesh, hinge)
    u, w1, v, w2 = hole
    if copies == 1:
        return _glue_crinkle_into_hole(reduced, hole, float(np.atleast_1d(angles)[0]))

    pts = reduced.vertices
    if wing is None:
        mid = 0.5 * (pts[u] + pts[v])
        wing = mid + wing_spread * (mid - 0.5 * (pts[w1] + pts[w2]))
    wing = np.asarray(wing, dtype=float)
    t_idx = len(pts)
    verts = np.vstack([pts, wing[None, :]])
    labels = dict(reduced.labels)
    if wing_label:
        labels[_fresh_label(labels, wing_label) if wing_label in labels else wing_label] = t_idx
    with_wing = TriMesh(verts, reduced.faces, labels)

    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    th1, th2 = (float(angles[0]), float(angles[-1]))
    step1 = _glue_crinkle_into_hole(with_wing, [u, w1, v, t_idx], th1)
    # gluing appended two vertices; the second hole (u, t, v, w2) survives
    return _glue_crinkle_into_hole(step1, [u, t_idx, v, w2], th2)
