"""Self-intersection detection for frames and flex paths.

Triangle pairs are tested with an interval method on the line where the two
face planes meet, after snapping near-plane vertices within `eps`. Contacts
shallower than `eps` count as touching and do not make a frame non-embedded:
traced frames carry solver noise of ~1e-10 and glued seams legitimately
touch. Face pairs sharing a vertex index are never tested; adjacency is
combinatorial, not metric, because twins keep distinct vertices at
coincident coordinates only at degenerate frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MeshError
from .geometry import TriMesh, bbox_diameter

EPS_REL = 1e-9

EDGE_THROUGH_FACE = "edge-through-face"
VERTEX_THROUGH_FACE = "vertex-through-face"
COPLANAR_OVERLAP = "coplanar-overlap"


@dataclass(frozen=True)
class Contact:
    segment: np.ndarray  # (2, 3) endpoints; equal rows for a point contact
    coplanar: bool
    depth: float

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.segment[1] - self.segment[0]))


@dataclass(frozen=True)
class FacePairHit:
    f1: int
    f2: int
    kind: str
    contact: Contact
    touching: bool

    def to_dict(self) -> dict:
        return {
            "faces": [self.f1, self.f2],
            "kind": self.kind,
            "segment": self.contact.segment.tolist(),
            "depth": self.contact.depth,
            "touching": self.touching,
        }


@dataclass(frozen=True)
class IntersectionReport:
    frame_index: int
    pairs: tuple[FacePairHit, ...]
    touching: tuple[FacePairHit, ...]
    eps: float

    @property
    def is_embedded(self) -> bool:
        return not self.pairs

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_index,
            "embedded": self.is_embedded,
            "eps": self.eps,
            "pairs": [p.to_dict() for p in self.pairs],
            "touching": [p.to_dict() for p in self.touching],
        }


def _unit_normal(tri: np.ndarray, eps_area: float) -> np.ndarray:
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    nn = np.linalg.norm(n)
    if nn <= 2.0 * eps_area:
        raise MeshError("degenerate triangle (zero area) in intersection test")
    return n / nn


def _crossing_points(tri: np.ndarray, d: np.ndarray) -> list[np.ndarray]:
    """Points where the triangle's edges meet the other plane (d = snapped
    signed distances of the triangle's vertices)."""
    pts = []
    for i in range(3):
        if d[i] == 0.0:
            pts.append(tri[i])
    for i in range(3):
        j = (i + 1) % 3
        if d[i] * d[j] < 0.0:
            t = d[i] / (d[i] - d[j])
            pts.append(tri[i] + t * (tri[j] - tri[i]))
    return pts


def _clip_coplanar(t1: np.ndarray, t2: np.ndarray, normal: np.ndarray):
    """Sutherland-Hodgman clip of t1 by t2 in their common plane."""
    poly = [p for p in t1]
    for i in range(3):
        a, b = t2[i], t2[(i + 1) % 3]
        inward = np.cross(normal, b - a)
        clipped = []
        if not poly:
            break
        d = [float(np.dot(p - a, inward)) for p in poly]
        for k in range(len(poly)):
            k2 = (k + 1) % len(poly)
            if d[k] >= 0:
                clipped.append(poly[k])
            if d[k] * d[k2] < 0:
                t = d[k] / (d[k] - d[k2])
                clipped.append(poly[k] + t * (poly[k2] - poly[k]))
        poly = clipped
    return poly


def _polygon_area(poly, normal) -> float:
    if len(poly) < 3:
        return 0.0
    s = np.zeros(3)
    for i in range(1, len(poly) - 1):
        s = s + np.cross(poly[i] - poly[0], poly[i + 1] - poly[0])
    return abs(float(np.dot(s, normal))) * 0.5


def intersect_triangles(t1, t2, eps: float = 0.0) -> Contact | None:
    """Contact segment of two closed triangles, or None when they are disjoint.

    Vertices within `eps` of the other triangle's plane are snapped onto it.
    Coplanar overlaps return the farthest-apart pair of the overlap polygon's
    vertices as the segment. Symmetric in its arguments.
    """
    t1 = np.asarray(t1, dtype=float).reshape(3, 3)
    t2 = np.asarray(t2, dtype=float).reshape(3, 3)
    scale = max(bbox_diameter(np.vstack([t1, t2])), 1e-300)
    eps_area = (max(eps, 1e-14 * scale)) * scale
    n1 = _unit_normal(t1, eps_area)
    n2 = _unit_normal(t2, eps_area)

    d1 = (t1 - t2[0]) @ n2
    d1[np.abs(d1) <= eps] = 0.0
    if np.all(d1 > 0) or np.all(d1 < 0):
        return None
    d2 = (t2 - t1[0]) @ n1
    d2[np.abs(d2) <= eps] = 0.0
    if np.all(d2 > 0) or np.all(d2 < 0):
        return None

    if np.all(d1 == 0.0):
        poly = _clip_coplanar(t1, t2, n2)
        if not poly:
            return None
        area = _polygon_area(poly, n2)
        ends = (0, 0)
        best = -1.0
        for i in range(len(poly)):
            for j in range(i, len(poly)):
                d = float(np.linalg.norm(poly[i] - poly[j]))
                if d > best:
                    best, ends = d, (i, j)
        seg = np.array([poly[ends[0]], poly[ends[1]]])
        # depth proxy: width of the overlap polygon transverse to its diameter
        depth = area / best if best > eps else 0.0
        return Contact(segment=seg, coplanar=True, depth=depth)

    axis_dir = np.cross(n1, n2)
    nn = np.linalg.norm(axis_dir)
    if nn < 1e-14:
        # parallel distinct planes that survived the side tests only through
        # snapping; treat as a grazing touch with no extent
        return None
    axis_dir /= nn

    p1 = _crossing_points(t1, d1)
    p2 = _crossing_points(t2, d2)
    if not p1 or not p2:
        return None
    s1 = sorted(float(p @ axis_dir) for p in p1)
    s2 = sorted(float(p @ axis_dir) for p in p2)
    lo = max(s1[0], s2[0])
    hi = min(s1[-1], s2[-1])
    if hi < lo - eps:
        return None
    lo, hi = min(lo, hi), max(lo, hi)
    origin = p1[0]
    base = float(origin @ axis_dir)
    seg = np.array([origin + (lo - base) * axis_dir, origin + (hi - base) * axis_dir])

    def lesser_extent(d):
        pos = d[d > 0]
        neg = -d[d < 0]
        return min(pos.max() if len(pos) else 0.0, neg.max() if len(neg) else 0.0)

    depth = max(lesser_extent(d1), lesser_extent(d2))
    return Contact(segment=seg, coplanar=False, depth=depth)


def _classify(t1, t2, d1, d2, eps) -> str:
    """Heuristic per-pair label following the two failure modes of paper
    models: a lone vertex poking through the other face, or an edge passing
    through it. A vertex pokes through when both edges at the minority-side
    vertex cross inside the other triangle."""
    for tri, d, other in ((t1, d1, t2), (t2, d2, t1)):
        pos = np.sum(d > 0)
        neg = np.sum(d < 0)
        if min(pos, neg) == 1 and max(pos, neg) == 2:
            crossings = _crossing_points(tri, d)
            if len(crossings) == 2 and all(_point_in_triangle(p, other, eps) for p in crossings):
                return VERTEX_THROUGH_FACE
    return EDGE_THROUGH_FACE


def _point_in_triangle(p, tri, eps) -> bool:
    v0 = tri[1] - tri[0]
    v1 = tri[2] - tri[0]
    w = p - tri[0]
    d00, d01, d11 = v0 @ v0, v0 @ v1, v1 @ v1
    dw0, dw1 = w @ v0, w @ v1
    den = d00 * d11 - d01 * d01
    if den <= 0:
        return False
    u = (d11 * dw0 - d01 * dw1) / den
    v = (d00 * dw1 - d01 * dw0) / den
    slack = eps / max(np.sqrt(den), 1e-300)
    return u >= -slack and v >= -slack and u + v <= 1 + slack


def self_intersections(
    mesh: TriMesh, coords: np.ndarray | None = None, eps: float | None = None, frame_index: int = 0,
    accelerate: bool = True,
) -> IntersectionReport:
    """All-pairs triangle test, skipping pairs that share a vertex index.

    An axis-aligned bounding-box pass filters candidates first; it is a pure
    filter and never changes the result set.
    """
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    if eps is None:
        eps = EPS_REL * bbox_diameter(pts)
    F = len(mesh.faces)
    tris = pts[mesh.faces]  # (F, 3, 3)

    if accelerate and F:
        lo = tris.min(axis=1) - eps
        hi = tris.max(axis=1) + eps
        overlap = np.ones((F, F), dtype=bool)
        for k in range(3):
            overlap &= lo[:, None, k] <= hi[None, :, k]
            overlap &= lo[None, :, k] <= hi[:, None, k]
    else:
        overlap = np.ones((F, F), dtype=bool)

    hits = []
    touch = []
    faces = mesh.faces
    for f1 in range(F):
        verts1 = set(faces[f1].tolist())
        for f2 in range(f1 + 1, F):
            if not overlap[f1, f2]:
                continue
            if verts1 & set(faces[f2].tolist()):
                continue
            contact = intersect_triangles(tris[f1], tris[f2], eps)
            if contact is None:
                continue
            if contact.coplanar:
                kind = COPLANAR_OVERLAP
            else:
                n1 = _unit_normal(tris[f1], eps)
                n2 = _unit_normal(tris[f2], eps)
                d1 = (tris[f1] - tris[f2][0]) @ n2
                d1[np.abs(d1) <= eps] = 0.0
                d2 = (tris[f2] - tris[f1][0]) @ n1
                d2[np.abs(d2) <= eps] = 0.0
                kind = _classify(tris[f1], tris[f2], d1, d2, eps)
            touching = contact.depth <= eps or contact.length <= eps
            hit = FacePairHit(f1=f1, f2=f2, kind=kind, contact=contact, touching=touching)
            (touch if touching else hits).append(hit)
    return IntersectionReport(frame_index=frame_index, pairs=tuple(hits), touching=tuple(touch), eps=eps)


@dataclass(frozen=True)
class PathEmbedding:
    reports: tuple[IntersectionReport, ...]
    embedded_flags: tuple[bool, ...]
    driver_values: tuple[float, ...]
    best_run: tuple[float, float] | None
    worst_depth: float

    @property
    def embedded_range_length(self) -> float:
        if self.best_run is None:
            return 0.0
        return abs(self.best_run[1] - self.best_run[0])

    def to_dict(self) -> dict:
        return {
            "embedded_flags": list(self.embedded_flags),
            "driver_values": list(self.driver_values),
            "best_run": list(self.best_run) if self.best_run else None,
            "embedded_range_length": self.embedded_range_length,
            "worst_depth": self.worst_depth,
            "frames": [r.to_dict() for r in self.reports],
        }


def path_embedding(path, mesh: TriMesh, eps: float | None = None) -> PathEmbedding:
    """Per-frame intersection reports plus the longest embedded driver run."""
    reports = []
    flags = []
    drivers = []
    worst = 0.0
    for k, frame in enumerate(path.frames):
        rep = self_intersections(mesh, frame.coords, eps, frame_index=k)
        reports.append(rep)
        flags.append(rep.is_embedded)
        drivers.append(float(frame.t[0]) if frame.t else float(k))
        for hit in rep.pairs:
            worst = max(worst, hit.contact.depth)
    best = None
    start = None
    for k, flag in enumerate(flags + [False]):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            lo, hi = drivers[start], drivers[k - 1]
            if best is None or abs(hi - lo) > abs(best[1] - best[0]):
                best = (lo, hi)
            start = None
    return PathEmbedding(
        reports=tuple(reports),
        embedded_flags=tuple(flags),
        driver_values=tuple(drivers),
        best_run=best,
        worst_depth=worst,
    )


def vertex_piercings(
    mesh: TriMesh, coords: np.ndarray | None = None, eps: float | None = None
) -> list[tuple[int, int]]:
    """(poking vertex, pierced face) pairs for vertex-through-face contacts.

    The poking vertex is the lone minority-side vertex of the piercing
    triangle; the pierced face is the one it passes through. Tent surgery
    wants exactly this pair."""
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    if eps is None:
        eps = EPS_REL * bbox_diameter(pts)
    report = self_intersections(mesh, pts, eps)
    out = []
    seen = set()
    for hit in report.pairs:
        if hit.kind != VERTEX_THROUGH_FACE:
            continue
        for fa, fb in ((hit.f1, hit.f2), (hit.f2, hit.f1)):
            tri = pts[mesh.faces[fa]]
            other = pts[mesh.faces[fb]]
            n = _unit_normal(other, eps)
            d = (tri - other[0]) @ n
            d[np.abs(d) <= eps] = 0.0
            pos, neg = np.sum(d > 0), np.sum(d < 0)
            if min(pos, neg) == 1 and max(pos, neg) == 2:
                crossings = _crossing_points(tri, d)
                if len(crossings) == 2 and all(_point_in_triangle(p, other, eps) for p in crossings):
                    local = int(np.argmax(d > 0)) if pos == 1 else int(np.argmax(d < 0))
                    vert = int(mesh.faces[fa][local])
                    if (vert, fb) not in seen:
                        seen.add((vert, fb))
                        out.append((vert, fb))
    return out


def ray_crossing_parity(mesh: TriMesh, coords: np.ndarray, origin, direction, eps: float | None = None) -> int:
    """Number of face crossings of the ray, mod 2 (consistency check of
    embeddedness: even from outside a closed embedded surface)."""
    pts = np.asarray(coords, dtype=float)
    if eps is None:
        eps = EPS_REL * bbox_diameter(pts)
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    count = 0
    for tri in pts[mesh.faces]:
        e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
        h = np.cross(d, e2)
        a = float(e1 @ h)
        if abs(a) < 1e-14:
            continue
        f = 1.0 / a
        s = o - tri[0]
        u = f * float(s @ h)
        if u < 0 or u > 1:
            continue
        q = np.cross(s, e1)
        v = f * float(d @ q)
        if v < 0 or u + v > 1:
            continue
        t = f * float(e2 @ q)
        if t > eps:
            count += 1
    return count % 2
