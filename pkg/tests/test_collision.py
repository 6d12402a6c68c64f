import numpy as np
import pytest

from twinflex.catalog import catalog
from twinflex.collision import (
    COPLANAR_OVERLAP,
    EDGE_THROUGH_FACE,
    VERTEX_THROUGH_FACE,
    intersect_triangles,
    path_embedding,
    ray_crossing_parity,
    self_intersections,
    vertex_piercings,
)
from twinflex.errors import MeshError
from twinflex.flexion import problem_for, trace

from conftest import random_convex_hull_mesh, random_rigid_motion


def oracle_intersects(t1, t2, eps=0.0):
    """Edge-vs-triangle clipping oracle, independent of the interval method."""
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    pts = []

    def edge_hits(tri_apex, tri_base):
        hits = []
        n = np.cross(tri_base[1] - tri_base[0], tri_base[2] - tri_base[0])
        n = n / np.linalg.norm(n)
        for i in range(3):
            p, q = tri_apex[i], tri_apex[(i + 1) % 3]
            dp = (p - tri_base[0]) @ n
            dq = (q - tri_base[0]) @ n
            if dp * dq > 0:
                continue
            if dp == dq:
                continue
            s = dp / (dp - dq)
            x = p + s * (q - p)
            # barycentric containment
            v0 = tri_base[1] - tri_base[0]
            v1 = tri_base[2] - tri_base[0]
            w = x - tri_base[0]
            d00, d01, d11 = v0 @ v0, v0 @ v1, v1 @ v1
            dw0, dw1 = w @ v0, w @ v1
            den = d00 * d11 - d01 * d01
            u = (d11 * dw0 - d01 * dw1) / den
            v = (d00 * dw1 - d01 * dw0) / den
            if u >= -1e-12 and v >= -1e-12 and u + v <= 1 + 1e-12:
                hits.append(x)
        return hits

    pts += edge_hits(t1, t2)
    pts += edge_hits(t2, t1)
    return pts


class TestIntersectTriangles:
    def test_parallel_separated(self):
        t1 = [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
        t2 = [[0, 0, 1], [1, 0, 1], [0, 1, 1]]
        assert intersect_triangles(t1, t2, 1e-12) is None

    def test_identical_coplanar(self):
        t1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        c = intersect_triangles(t1, t1, 1e-12)
        assert c is not None and c.coplanar
        # the reported diameter segment lies inside the triangle
        assert c.length == pytest.approx(np.sqrt(2.0))

    def test_transversal_matches_oracle_segment(self):
        t1 = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        t2 = np.array([[0.2, 0.2, -0.5], [0.4, 0.2, 0.5], [0.3, 0.4, 0.5]], dtype=float)
        c = intersect_triangles(t1, t2, 1e-12)
        assert c is not None and not c.coplanar
        oracle_pts = oracle_intersects(t1, t2)
        assert len(oracle_pts) >= 2
        want = sorted(tuple(np.round(p, 9)) for p in oracle_pts[:2])
        got = sorted(tuple(np.round(p, 9)) for p in c.segment)
        np.testing.assert_allclose(np.asarray(got, float), np.asarray(want, float), atol=1e-12)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            t1 = rng.normal(size=(3, 3))
            t2 = rng.normal(size=(3, 3))
            c12 = intersect_triangles(t1, t2, 1e-12)
            c21 = intersect_triangles(t2, t1, 1e-12)
            assert (c12 is None) == (c21 is None)

    def test_degenerate_triangle_rejected(self):
        t1 = [[0, 0, 0], [1, 0, 0], [2, 0, 0]]
        t2 = [[0, 0, 1], [1, 0, 1], [0, 1, 1]]
        with pytest.raises(MeshError, match="degenerate"):
            intersect_triangles(t1, t2, 1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_random_pairs_agree_with_oracle(self, seed):
        rng = np.random.default_rng(seed)
        disagreements = 0
        for _ in range(500):
            t1 = rng.normal(size=(3, 3))
            t2 = rng.normal(size=(3, 3))
            got = intersect_triangles(t1, t2, 1e-9) is not None
            pts = oracle_intersects(t1, t2)
            want = len(pts) >= 1
            if got != want:
                # ignore contacts shallower than the separation guard
                seps = [np.linalg.norm(p - q) for p in t1 for q in t2]
                if min(seps) > 1e-6:
                    disagreements += 1
        assert disagreements == 0


class TestSelfIntersections:
    def test_cube_embedded(self, cube2):
        rep = self_intersections(cube2)
        assert rep.is_embedded and rep.pairs == ()

    def test_bricard1_always_intersects(self):
        rep = self_intersections(catalog("bricard1").mesh)
        assert not rep.is_embedded

    def test_star_dodecahedron_rotated_edge(self):
        tw = catalog("star_dodecahedron")
        rep = self_intersections(tw.mesh)
        assert not rep.is_embedded
        # the crossing involves the rotated peak edge's faces
        kinds = {p.kind for p in rep.pairs}
        assert EDGE_THROUGH_FACE in kinds or COPLANAR_OVERLAP in kinds

    def test_adjacent_faces_never_reported(self):
        rep = self_intersections(catalog("bricard1").mesh)
        faces = catalog("bricard1").mesh.faces
        for hit in rep.pairs + rep.touching:
            f1 = set(faces[hit.f1].tolist())
            f2 = set(faces[hit.f2].tolist())
            assert not (f1 & f2)

    def test_acceleration_is_pure_filter(self):
        for name in ("bricard1", "star_dodecahedron", "foxtrot_template"):
            mesh = catalog(name).mesh if hasattr(catalog(name), "mesh") else catalog(name)
            with_acc = self_intersections(mesh, accelerate=True)
            without = self_intersections(mesh, accelerate=False)
            assert [(p.f1, p.f2) for p in with_acc.pairs] == [(p.f1, p.f2) for p in without.pairs]

    def test_rigid_motion_invariance(self):
        tw = catalog("star_dodecahedron")
        base = [(p.f1, p.f2) for p in self_intersections(tw.mesh).pairs]
        for seed in range(3):
            R, t = random_rigid_motion(seed + 40)
            moved = tw.mesh.vertices @ R.T + t
            pairs = [(p.f1, p.f2) for p in self_intersections(tw.mesh, moved).pairs]
            assert pairs == base

    def test_vertex_piercing_detection(self):
        fox = catalog("foxtrot_template")
        rep = self_intersections(fox)
        assert VERTEX_THROUGH_FACE in {p.kind for p in rep.pairs}
        hits = vertex_piercings(fox)
        assert hits
        for vert, face in hits:
            assert vert not in fox.faces[face].tolist()


class TestRayParity:
    def test_even_from_outside_closed_embedded(self, cube2):
        rng = np.random.default_rng(2)
        origin = np.array([5.0, 4.0, 3.0])
        for _ in range(20):
            d = rng.normal(size=3)
            assert ray_crossing_parity(cube2, cube2.vertices, origin, d) == 0

    def test_odd_from_inside(self, cube2):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = rng.normal(size=3)
            assert ray_crossing_parity(cube2, cube2.vertices, [0.1, 0.05, -0.2], d) == 1

    @pytest.mark.parametrize("seed", [0, 5])
    def test_hull_parity(self, seed):
        mesh = random_convex_hull_mesh(seed)
        rng = np.random.default_rng(seed + 100)
        origin = mesh.vertices.mean(axis=0) + np.array([10.0, 0.0, 0.0])
        for _ in range(10):
            assert ray_crossing_parity(mesh, mesh.vertices, origin, rng.normal(size=3)) == 0


class TestPathEmbedding:
    def test_twin_paths_never_embed(self):
        tw = catalog("bricard1")
        prob = problem_for(tw)
        d0 = tw.diagonal_length()
        path = trace(prob, np.linspace(0.98 * d0, 1.02 * d0, 7))
        emb = path_embedding(path, tw.mesh)
        assert sum(emb.embedded_flags) == 0
        assert emb.best_run is None and emb.embedded_range_length == 0.0

    def test_single_frame_summary(self, cube2):
        class OneFrame:
            class F:
                t = (0.0,)
                coords = None
            frames = [F()]
        OneFrame.frames[0].coords = cube2.vertices
        emb = path_embedding(OneFrame(), cube2)
        assert emb.embedded_flags == (True,)
        assert emb.best_run == (0.0, 0.0)

    def test_report_serializes(self):
        tw = catalog("star_dodecahedron")
        rep = self_intersections(tw.mesh)
        import json

        d = rep.to_dict()
        json.dumps(d)
        assert d["embedded"] is False
        assert d["pairs"]
