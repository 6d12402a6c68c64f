import numpy as np
import pytest

from twinflex.catalog import catalog
from twinflex.errors import ConstructionError, DoubleCoverError, SymmetryError
from twinflex.geometry import (
    TriMesh,
    bbox_diameter,
    edge_lengths,
    mesh_stats,
    orient_faces,
    signed_volume,
)
from twinflex.symmetry import TYPE_I, TYPE_II, SymmetricQuad, apply_isometry, quad_isometry
from twinflex.twinning import (
    Patch,
    erect_tent,
    fit_bricard_crinkle,
    glue_boundaries,
    make_cap,
    make_crinkle,
    replace_hinge_with_crinkles,
    twin,
)

from conftest import build_mesh


def pyramid_seed():
    return catalog("pyramid")


class TestMakeCap:
    def test_pyramid_cap_is_four_triangle_chain(self):
        seed = pyramid_seed()
        quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"),
                             seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
        cap = make_cap(seed, quad)
        assert len(cap.mesh.faces) == 4
        assert len(cap.boundary) == 4
        assert set(cap.boundary) == {0, 1, 2, 3}
        st = mesh_stats(cap.mesh)
        assert st.euler_characteristic == 1

    def test_anticupola_cap_has_six_faces(self):
        seed = catalog("anticupola")
        quad = SymmetricQuad(seed.index_of("A1"), seed.index_of("A2"),
                             seed.index_of("A3"), seed.index_of("A4"), TYPE_I)
        cap = make_cap(seed, quad)
        assert len(cap.mesh.faces) == 6

    def test_tetrahedron_any_edge_gives_hinge(self, unit_tetrahedron):
        quad = SymmetricQuad(0, 2, 1, 3, TYPE_I)
        cap = make_cap(unit_tetrahedron, quad)
        assert len(cap.mesh.faces) == 2

    def test_wrong_opposite_vertices_rejected(self):
        seed = pyramid_seed()
        quad = SymmetricQuad(seed.index_of("A"), seed.index_of("C"),
                             seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
        with pytest.raises(ConstructionError, match="third vertices"):
            make_cap(seed, quad)

    def test_non_edge_rejected(self):
        seed = pyramid_seed()
        # B and B' are not connected by an edge
        quad = SymmetricQuad(seed.index_of("B"), seed.index_of("A"),
                             seed.index_of("B'"), seed.index_of("A'"), TYPE_I)
        with pytest.raises(ConstructionError, match="interior edge"):
            make_cap(seed, quad)

    def test_open_mesh_rejected(self):
        m = TriMesh(np.eye(3), np.array([[0, 1, 2]]))
        with pytest.raises(ConstructionError, match="closed"):
            make_cap(m, SymmetricQuad(0, 1, 2, 0, TYPE_I))


class TestTwin:
    def test_bricard1_counts(self):
        tw = catalog("bricard1")
        st = mesh_stats(tw.mesh)
        assert (st.V, st.E, st.F) == (6, 12, 8)
        assert st.is_triangulated_sphere

    def test_bricard2_counts(self):
        tw = catalog("bricard2")
        st = mesh_stats(tw.mesh)
        assert (st.V, st.E, st.F) == (6, 12, 8)

    def test_twinned_anticupola_is_dodecahedron(self):
        tw = catalog("twinned_anticupola")
        assert len(tw.mesh.faces) == 12

    def test_pairing_matches_isometry(self):
        for name in ("bricard1", "bricard2", "twinned_anticupola"):
            tw = catalog(name)
            pts = tw.mesh.vertices
            iso = quad_isometry(pts[list(tw.equator)], tw.kind)
            diam = bbox_diameter(pts)
            for v, w in tw.pairing.items():
                sent = apply_isometry(iso, pts[v])
                assert np.linalg.norm(sent - pts[w]) < 1e-10 * diam

    def test_type1_volume_zero_type2_measured(self):
        diam1 = bbox_diameter(catalog("bricard1").mesh.vertices)
        assert abs(signed_volume(catalog("bricard1").mesh)) < 1e-10 * diam1**3
        # type II volume is not asserted zero by the construction; just finite
        v2 = signed_volume(catalog("bricard2").mesh)
        assert np.isfinite(v2)

    def test_double_cover_rejected(self):
        # apex on the symmetry axis makes the pyramid symmetric itself
        seed = catalog("pyramid", {"cx": 0.0, "cy": 0.0, "cz": 2.0})
        quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"),
                             seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
        with pytest.raises(DoubleCoverError):
            twin(make_cap(seed, quad), TYPE_I)

    def test_asymmetric_boundary_rejected(self, unit_tetrahedron):
        cap = make_cap(unit_tetrahedron, SymmetricQuad(0, 2, 1, 3, TYPE_I))
        with pytest.raises(SymmetryError):
            twin(cap, TYPE_I)

    def test_copied_labels(self):
        tw = catalog("bricard1")
        assert "C'" in tw.mesh.labels
        assert tw.pairing[tw.mesh.index_of("C")] == tw.mesh.index_of("C'")


class TestMakeCrinkle:
    def test_bricard_crinkle(self):
        cr = catalog("bricard_crinkle")
        st = mesh_stats(cr.mesh)
        assert st.euler_characteristic == 1
        assert len(cr.boundary) == 4
        assert len(cr.phantom_pairs) == 1
        edges = {tuple(e) for e in cr.mesh.edges().tolist()}
        assert cr.phantom_pairs[0] not in edges

    def test_pentagonal_crinkle(self):
        cr = catalog("pentagonal_crinkle")
        assert len(cr.boundary) == 5
        assert len(cr.phantom_pairs) == 2
        assert len(cr.mesh.faces) == 9

    def test_two_separate_holes_rejected(self, cube2):
        # opening the top and bottom of a cube leaves an annulus: not a disk
        with pytest.raises(ConstructionError, match="disk"):
            make_crinkle(cube2, [(0, 3), (4, 7)])

    def test_disconnecting_removal_rejected(self):
        tw = catalog("bricard1")
        a, b = tw.mesh.index_of("A"), tw.mesh.index_of("B")
        a2, b2 = tw.mesh.index_of("A'"), tw.mesh.index_of("B'")
        with pytest.raises(ConstructionError, match="disconnect"):
            make_crinkle(tw.mesh, [(a, b), (a2, b2)])

    def test_missing_edge_rejected(self):
        tw = catalog("bricard1")
        c, c2 = tw.mesh.index_of("C"), tw.mesh.index_of("C'")
        with pytest.raises(ConstructionError, match="not an edge"):
            make_crinkle(tw, [(c, c2)])


class TestErectTent:
    def test_tent_on_equilateral_triangle(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0], [0.5, np.sqrt(3) / 6, 1.0]])
        mesh = build_mesh(verts, [[0, 1, 2], [0, 1, 3], [1, 2, 3], [2, 0, 3]])
        out = erect_tent(mesh, 0, 0.7)
        apex = out.vertices[-1]
        centroid = verts[:3].mean(axis=0)
        assert np.linalg.norm(apex - centroid) == pytest.approx(0.7)
        # three new faces are congruent isoceles triangles
        new = out.faces[-3:]
        sides = sorted(np.linalg.norm(out.vertices[f[0]] - out.vertices[-1]) for f in new)
        assert sides[0] == pytest.approx(sides[-1])

    def test_euler_characteristic_preserved(self, cube2):
        st0 = mesh_stats(cube2)
        out = erect_tent(cube2, 3, 0.5)
        st1 = mesh_stats(out)
        assert st1.euler_characteristic == st0.euler_characteristic
        assert (st1.V, st1.E, st1.F) == (st0.V + 1, st0.E + 3, st0.F + 2)

    def test_existing_edge_lengths_unchanged(self, cube2):
        before = edge_lengths(cube2)
        out = erect_tent(cube2, 0, 1.3)
        after = edge_lengths(out)
        for key, val in before.items():
            if key in after:
                assert after[key] == val
        # the tented face's own edges survive as tent-base edges
        for a, b in [(cube2.faces[0][i], cube2.faces[0][(i + 1) % 3]) for i in range(3)]:
            assert (min(a, b), max(a, b)) in after

    def test_piercing_removed_by_tent(self):
        from twinflex.collision import vertex_piercings

        fox = catalog("foxtrot_template")
        assert len(vertex_piercings(fox)) > 0
        tented = catalog("foxtrot_template", {"tent_h": 0.9})
        assert vertex_piercings(tented) == []

    def test_bad_face_rejected(self, cube2):
        with pytest.raises(ConstructionError, match="out of range"):
            erect_tent(cube2, 99, 1.0)
        with pytest.raises(ConstructionError, match="non-zero"):
            erect_tent(cube2, 0, 0.0)


class TestGlueBoundaries:
    def test_regluing_reproduces_twin(self):
        seed = pyramid_seed()
        quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"),
                             seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
        cap = make_cap(seed, quad)
        tw = twin(cap, TYPE_I)

        iso = quad_isometry(cap.boundary_coords(), TYPE_I)
        a, b, a2, b2 = cap.boundary
        moved = apply_isometry(iso, cap.mesh.vertices)
        copy = TriMesh(moved, cap.mesh.faces[:, ::-1])
        # boundary loop of the flipped copy runs opposite; glue by the induced
        # permutation A->A', B->B'
        corr = [(a, a2), (b, b2), (a2, a), (b2, b)]
        glued = glue_boundaries(Patch(cap.mesh, cap.boundary),
                                Patch(copy, tuple(reversed(cap.boundary))), corr)
        assert mesh_stats(glued).is_triangulated_sphere
        st_twin = mesh_stats(tw.mesh)
        st_glued = mesh_stats(glued)
        assert (st_glued.V, st_glued.E, st_glued.F) == (st_twin.V, st_twin.E, st_twin.F)

    def test_length_mismatch_rejected(self, unit_tetrahedron):
        cap1 = make_cap(unit_tetrahedron, SymmetricQuad(0, 2, 1, 3, TYPE_I))
        big = TriMesh(unit_tetrahedron.vertices * 2.0, unit_tetrahedron.faces)
        cap2 = make_cap(big, SymmetricQuad(0, 2, 1, 3, TYPE_I))
        loop1, loop2 = cap1.boundary, tuple(reversed(cap2.boundary))
        corr = list(zip(loop1, loop2))
        with pytest.raises(ConstructionError, match="length"):
            glue_boundaries(cap1, cap2, corr)

    def test_same_direction_walk_rejected(self):
        seed = pyramid_seed()
        quad = SymmetricQuad(seed.index_of("A"), seed.index_of("B"),
                             seed.index_of("A'"), seed.index_of("B'"), TYPE_I)
        cap = make_cap(seed, quad)
        iso = quad_isometry(cap.boundary_coords(), TYPE_I)
        moved = apply_isometry(iso, cap.mesh.vertices)
        copy = TriMesh(moved, cap.mesh.faces)  # not flipped: walks the same way
        a, b, a2, b2 = cap.boundary
        corr = [(a, a2), (b, b2), (a2, a), (b2, b)]
        with pytest.raises(ConstructionError, match="orientation|direction"):
            glue_boundaries(Patch(cap.mesh, cap.boundary), Patch(copy, cap.boundary), corr)


class TestFitBricardCrinkle:
    def test_boundary_and_phantom(self):
        rng = np.random.default_rng(5)
        quad = rng.normal(size=(4, 3))
        cr = fit_bricard_crinkle(quad, angle=0.4)
        np.testing.assert_allclose(cr.mesh.vertices[0], quad[0])
        np.testing.assert_allclose(cr.mesh.vertices[5], quad[2])
        assert cr.phantom_pairs == ((0, 5),)
        assert len(cr.mesh.faces) == 6

    def test_degenerate_diagonal_rejected(self):
        quad = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 0, 0]], dtype=float)
        with pytest.raises(ConstructionError):
            fit_bricard_crinkle(quad, 0.0)


class TestReplaceHinge:
    def tet(self):
        verts = np.array([[0, 0, 0], [2, 0, 0], [1, 1.6, 0.4], [1, -0.3, 1.5]], float)
        return build_mesh(verts, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
                          {"P": 0, "Q": 1, "R": 2, "S": 3})

    def test_two_copies_give_steffen_counts(self):
        out = replace_hinge_with_crinkles(self.tet(), (0, 1), copies=2, angles=(0.9, -0.9))
        st = mesh_stats(out)
        assert (st.V, st.E, st.F) == (9, 21, 14)
        assert st.is_triangulated_sphere
        edges = {tuple(e) for e in out.edges().tolist()}
        assert (0, 1) not in edges  # hinge gone

    def test_phantom_distance_equals_hinge_length(self):
        tet = self.tet()
        hinge_len = np.linalg.norm(tet.vertices[0] - tet.vertices[1])
        out = replace_hinge_with_crinkles(tet, (0, 1), copies=2, angles=(0.9, -0.9))
        # phantom pair endpoints are the original hinge vertices, untouched
        assert np.linalg.norm(out.vertices[0] - out.vertices[1]) == pytest.approx(hinge_len, rel=1e-9)

    def test_existing_edge_lengths_preserved(self):
        tet = self.tet()
        before = edge_lengths(tet)
        out = replace_hinge_with_crinkles(tet, (0, 1), copies=1, angles=(0.7,))
        after = edge_lengths(out)
        for key, val in before.items():
            if key == (0, 1):
                continue
            assert after[key] == val

    def test_single_copy_fills_the_hole(self):
        out = replace_hinge_with_crinkles(self.tet(), (0, 1), copies=1, angles=(0.7,))
        st = mesh_stats(out)
        assert st.is_triangulated_sphere
        assert (st.V, st.E, st.F) == (4 + 2, 12, 8)

    def test_volume_carried_by_rigid_part(self):
        tet = self.tet()
        vol = signed_volume(tet)
        out = replace_hinge_with_crinkles(tet, (0, 1), copies=2, angles=(0.9, -0.9))
        assert signed_volume(out) == pytest.approx(vol, rel=1e-12)

    def test_boundary_edge_rejected(self):
        m = TriMesh(np.eye(3), np.array([[0, 1, 2]]))
        with pytest.raises(ConstructionError, match="interior"):
            replace_hinge_with_crinkles(m, (0, 1), copies=1)
