"""Unfold a surface into a printable net; export SVG and animation frames.

Faces are placed in the plane along a breadth-first spanning tree of the
face-adjacency graph: each face hinges flat about the edge it shares with its
tree parent. Tree edges become creases labelled mountain, valley or flat
from the 3D dihedral; non-tree interior edges are cut and get matched gluing
marks. Overlapping placements are detected and reported, never resolved.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import NetError
from .geometry import TriMesh, face_areas

MOUNTAIN = "mountain"
VALLEY = "valley"
FLAT = "flat"

FLAT_ANGLE_TOL = 1e-6

_MARK_SYMBOLS = "abcdefghijklmnopqrstuvwxyz"
_MARK_COLORS = (
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
    "#a65628", "#f781bf", "#1b9e77", "#7570b3", "#66a61e",
)


@dataclass(frozen=True)
class Crease:
    """Tree edge of the unfolding: a fold line between face and tree parent."""

    edge: tuple[int, int]  # mesh vertex indices
    faces: tuple[int, int]  # (parent, child)
    label: str
    fold_angle: float  # signed dihedral: rotation that refolds the child


@dataclass(frozen=True)
class CutEdge:
    """Non-tree interior edge: appears twice in the net, with matched marks."""

    edge: tuple[int, int]
    faces: tuple[int, int]
    label: str
    mark: int


@dataclass(frozen=True)
class Net:
    mesh: TriMesh
    placements: np.ndarray  # (F, 3, 2) per-face 2D vertex coordinates
    tree_parent: tuple[int, ...]  # parent face per face, -1 at the root
    creases: tuple[Crease, ...]
    cuts: tuple[CutEdge, ...]
    boundary_edges: tuple[tuple[int, int], ...]
    overlaps: tuple[tuple[int, int], ...]

    @property
    def root(self) -> int:
        return self.tree_parent.index(-1)


def _local_2d(tri: np.ndarray) -> np.ndarray:
    """Isometric coordinates of a 3D triangle in its own plane."""
    e1 = tri[1] - tri[0]
    n = np.cross(e1, tri[2] - tri[0])
    nn = np.linalg.norm(n)
    if nn == 0 or np.linalg.norm(e1) == 0:
        raise NetError("degenerate face cannot be unfolded")
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(n / nn, e1)
    rel = tri - tri[0]
    return np.column_stack([rel @ e1, rel @ e2])


def _place_child(child_tri3, shared, placed_parent, parent_face_verts, child_face_verts):
    """2D coordinates for a child face hinged flat about the shared edge."""
    u, v = shared
    pu = placed_parent[parent_face_verts.index(u)]
    pv = placed_parent[parent_face_verts.index(v)]
    (w,) = set(child_face_verts) - {u, v}
    cu = child_tri3[child_face_verts.index(u)]
    cv = child_tri3[child_face_verts.index(v)]
    cw = child_tri3[child_face_verts.index(w)]

    a = np.linalg.norm(cw - cu)
    e = pv - pu
    elen = np.linalg.norm(e)
    ex = e / elen
    ey = np.array([-ex[1], ex[0]])
    # distance along and across the edge from the 3D shape
    x = float((cw - cu) @ (cv - cu)) / elen
    h2 = a * a - x * x
    y = float(np.sqrt(max(h2, 0.0)))

    # parent's third vertex decides the side; the child goes opposite
    (pw_vert,) = set(parent_face_verts) - {u, v}
    pw = placed_parent[parent_face_verts.index(pw_vert)]
    side = float((pw - pu) @ ey)
    y = -y if side > 0 else y
    pos = {u: pu, v: pv, w: pu + x * ex + y * ey}
    return np.array([pos[t] for t in child_face_verts])


def _signed_dihedral(tri_parent, tri_child, shared, parent_verts, child_verts):
    """Signed fold angle about the shared edge: zero when the faces are coplanar,
    positive when the child folds toward the parent's normal side."""
    u, v = shared
    axis = tri_parent[parent_verts.index(v)] - tri_parent[parent_verts.index(u)]
    axis = axis / np.linalg.norm(axis)
    n1 = np.cross(tri_parent[1] - tri_parent[0], tri_parent[2] - tri_parent[0])
    n2 = np.cross(tri_child[1] - tri_child[0], tri_child[2] - tri_child[0])
    n1 /= np.linalg.norm(n1)
    n2 /= np.linalg.norm(n2)
    return float(np.arctan2(np.dot(np.cross(n1, n2), axis), np.dot(n1, n2)))


def _fold_label(mesh: TriMesh, pts: np.ndarray, f1: int, f2: int) -> str:
    """Mountain when the neighbour's centroid lies below this face's plane
    (convex dihedral for an outward-oriented surface), valley when above."""
    tri1 = pts[mesh.faces[f1]]
    tri2 = pts[mesh.faces[f2]]
    n1 = np.cross(tri1[1] - tri1[0], tri1[2] - tri1[0])
    n1 = n1 / np.linalg.norm(n1)
    gap = float(n1 @ (tri2.mean(axis=0) - tri1.mean(axis=0)))
    scale = np.linalg.norm(tri1 - tri1.mean(axis=0), axis=1).max()
    if abs(gap) < FLAT_ANGLE_TOL * scale:
        return FLAT
    return MOUNTAIN if gap < 0 else VALLEY


def _tri_overlap_2d(t1: np.ndarray, t2: np.ndarray, tol: float) -> bool:
    """True when two 2D triangles overlap with interior area beyond tol."""
    def clip(subject, clipper):
        # signed area orientation of clipper
        area = 0.0
        for i in range(3):
            x1, y1 = clipper[i]
            x2, y2 = clipper[(i + 1) % 3]
            area += x1 * y2 - x2 * y1
        sign = 1.0 if area > 0 else -1.0
        poly = list(subject)
        for i in range(3):
            a, b = clipper[i], clipper[(i + 1) % 3]
            edge = b - a
            normal = sign * np.array([-edge[1], edge[0]])
            if not poly:
                break
            d = [float((p - a) @ normal) for p in poly]
            out = []
            for k in range(len(poly)):
                k2 = (k + 1) % len(poly)
                if d[k] >= 0:
                    out.append(poly[k])
                if d[k] * d[k2] < 0:
                    t = d[k] / (d[k] - d[k2])
                    out.append(poly[k] + t * (poly[k2] - poly[k]))
            poly = out
        return poly

    poly = clip(t1, t2)
    if len(poly) < 3:
        return False
    area = 0.0
    for i in range(1, len(poly) - 1):
        u = poly[i] - poly[0]
        v = poly[i + 1] - poly[0]
        area += abs(float(u[0] * v[1] - u[1] * v[0])) / 2.0
    return area > tol


def unfold(mesh: TriMesh, coords: np.ndarray | None = None, root: int | None = None) -> Net:
    """Flatten the surface along a BFS spanning tree from `root`.

    The root defaults to the largest-area face, which gives compact nets
    deterministically; any face index may be forced instead.
    """
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    F = len(mesh.faces)
    if F == 0:
        raise NetError("empty mesh has no net")
    adj = mesh.face_adjacency()
    if root is None:
        root = int(np.argmax(face_areas(mesh, pts)))
    if not 0 <= root < F:
        raise NetError(f"root face {root} out of range")

    shared_edge: dict[tuple[int, int], tuple[int, int]] = {}
    for (a, b), fids in mesh.edge_faces().items():
        if len(fids) == 2:
            shared_edge[(fids[0], fids[1])] = (a, b)
            shared_edge[(fids[1], fids[0])] = (a, b)

    placements = np.zeros((F, 3, 2))
    parent = [-2] * F
    parent[root] = -1
    placements[root] = _local_2d(pts[mesh.faces[root]])
    order = [root]
    queue = deque([root])
    while queue:
        f = queue.popleft()
        for g in sorted(adj[f]):
            if parent[g] != -2:
                continue
            parent[g] = f
            shared = shared_edge[(f, g)]
            placements[g] = _place_child(
                pts[mesh.faces[g]],
                shared,
                placements[f],
                mesh.faces[f].tolist(),
                mesh.faces[g].tolist(),
            )
            order.append(g)
            queue.append(g)
    if any(p == -2 for p in parent):
        raise NetError("mesh faces are not edge-connected; unfold one component at a time")

    creases = []
    cuts = []
    tree_pairs = {(parent[f], f) for f in range(F) if parent[f] >= 0}
    tree_pairs |= {(f, parent[f]) for f in range(F) if parent[f] >= 0}
    mark = 0
    for (a, b), fids in sorted(mesh.edge_faces().items()):
        if len(fids) != 2:
            continue
        f1, f2 = fids
        label = _fold_label(mesh, pts, f1, f2)
        if (f1, f2) in tree_pairs:
            pf, cf = (f1, f2) if parent[f2] == f1 else (f2, f1)
            angle = _signed_dihedral(
                pts[mesh.faces[pf]], pts[mesh.faces[cf]], (a, b),
                mesh.faces[pf].tolist(), mesh.faces[cf].tolist(),
            )
            creases.append(Crease(edge=(a, b), faces=(pf, cf), label=label, fold_angle=angle))
        else:
            cuts.append(CutEdge(edge=(a, b), faces=(f1, f2), label=label, mark=mark))
            mark += 1

    scale = float(np.abs(placements).max()) or 1.0
    overlaps = []
    tol = 1e-9 * scale * scale
    for i in range(F):
        for j in range(i + 1, F):
            if (i, j) in tree_pairs:
                continue
            if _tri_overlap_2d(placements[i], placements[j], tol):
                overlaps.append((i, j))

    boundary = tuple(mesh.boundary_edges())
    return Net(
        mesh=mesh,
        placements=placements,
        tree_parent=tuple(parent),
        creases=tuple(creases),
        cuts=tuple(cuts),
        boundary_edges=boundary,
        overlaps=tuple(overlaps),
    )


def refold(net: Net) -> np.ndarray:
    """Fold the net back along its crease angles; (F, 3, 3) face coordinates.

    Faces are re-embedded starting from the root in the z=0 plane, each child
    first laid flat in its parent's plane and then rotated about the shared
    edge by the stored fold angle. Used to check the net reproduces the 3D
    frame up to a rigid motion.
    """
    mesh = net.mesh
    F = len(mesh.faces)
    out = np.zeros((F, 3, 3))
    maps = {}

    root = net.root
    out[root] = np.column_stack([net.placements[root], np.zeros(3)])
    maps[root] = (np.eye(3)[:, :2], np.zeros(3))  # 2D -> 3D affine map

    by_child = {c.faces[1]: c for c in net.creases}
    children: dict[int, list[int]] = {}
    for f, p in enumerate(net.tree_parent):
        if p >= 0:
            children.setdefault(p, []).append(f)

    stack = [root]
    while stack:
        f = stack.pop()
        A, b = maps[f]
        for g in children.get(f, ()):
            crease = by_child[g]
            flat = net.placements[g] @ A.T + b
            u, v = crease.edge
            gverts = mesh.faces[g].tolist()
            p0 = flat[gverts.index(u)]
            axis = flat[gverts.index(v)] - p0
            axis = axis / np.linalg.norm(axis)
            c, s = np.cos(crease.fold_angle), np.sin(crease.fold_angle)
            K = np.array([
                [0, -axis[2], axis[1]],
                [axis[2], 0, -axis[0]],
                [-axis[1], axis[0], 0],
            ])
            R = np.eye(3) + s * K + (1 - c) * (K @ K)
            out[g] = (flat - p0) @ R.T + p0
            maps[g] = (R @ A, R @ (b - p0) + p0)
            stack.append(g)
    return out


def export_svg(net: Net, stroke_mm: float = 0.4, unit_mm: float = 20.0) -> str:
    """SVG 1.1 net: solid mountain strokes, dashed valley, marks on cut pairs."""
    if len(net.mesh.faces) == 0:
        raise NetError("empty net")
    pts = net.placements.reshape(-1, 2) * unit_mm
    lo = pts.min(axis=0) - 2 * unit_mm
    hi = pts.max(axis=0) + 2 * unit_mm
    size = hi - lo

    def path(p, q):
        return f'M {p[0]:.3f} {p[1]:.3f} L {q[0]:.3f} {q[1]:.3f}'

    def seg_of(face: int, edge):
        verts = net.mesh.faces[face].tolist()
        a, b = edge
        return net.placements[face][verts.index(a)] * unit_mm, net.placements[face][verts.index(b)] * unit_mm

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size[0]:.1f}mm" height="{size[1]:.1f}mm" '
        f'viewBox="{lo[0]:.3f} {lo[1]:.3f} {size[0]:.3f} {size[1]:.3f}">',
        f'<g fill="none" stroke-width="{stroke_mm}">',
    ]
    # outline: boundary edges plus both copies of every cut edge
    outline = []
    for cut in net.cuts:
        for f in cut.faces:
            outline.append(seg_of(f, cut.edge))
    for edge in net.boundary_edges:
        fid = net.mesh.edge_faces()[edge][0]
        outline.append(seg_of(fid, edge))
    for p, q in outline:
        lines.append(f'<path stroke="#000000" d="{path(p, q)}"/>')

    for crease in net.creases:
        p, q = seg_of(crease.faces[0], crease.edge)
        if crease.label == VALLEY:
            lines.append(f'<path stroke="#444444" stroke-dasharray="2,2" d="{path(p, q)}"/>')
        elif crease.label == MOUNTAIN:
            lines.append(f'<path stroke="#000000" d="{path(p, q)}"/>')
        else:
            lines.append(f'<path stroke="#bbbbbb" stroke-dasharray="0.5,2" d="{path(p, q)}"/>')

    for cut in net.cuts:
        color = _MARK_COLORS[cut.mark % len(_MARK_COLORS)]
        symbol = _MARK_SYMBOLS[cut.mark % len(_MARK_SYMBOLS)]
        reps = cut.mark // len(_MARK_SYMBOLS) + 1
        for f in cut.faces:
            p, q = seg_of(f, cut.edge)
            mid = (p + q) / 2
            lines.append(
                f'<text x="{mid[0]:.3f}" y="{mid[1]:.3f}" font-size="{0.25 * unit_mm:.2f}" '
                f'fill="{color}" text-anchor="middle">{symbol * reps}</text>'
            )
    if net.overlaps:
        for i, j in net.overlaps:
            for f in (i, j):
                tri = net.placements[f] * unit_mm
                d = (
                    f'M {tri[0][0]:.3f} {tri[0][1]:.3f} L {tri[1][0]:.3f} {tri[1][1]:.3f} '
                    f'L {tri[2][0]:.3f} {tri[2][1]:.3f} Z'
                )
                lines.append(f'<path stroke="#ff0000" fill="#ff0000" fill-opacity="0.15" d="{d}"/>')
    lines.append("</g></svg>")
    return "\n".join(lines)


def export_frames(path, fp) -> None:
    """Write a FlexPath's JSON contract; full float precision round-trips."""
    import json

    json.dump(path.to_dict(), fp)


def load_frames(fp) -> dict:
    import json

    return json.load(fp)
