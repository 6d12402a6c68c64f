import numpy as np
import pytest

from twinflex.catalog import catalog
from twinflex.errors import MeshError
from twinflex.rigidity import (
    Framework,
    analyze,
    dof_count,
    framework_from_mesh,
    rigidity_matrix,
    trivial_motion_basis,
)

from conftest import random_convex_hull_mesh, random_rigid_motion


class TestDofCount:
    def test_octahedron(self, regular_octahedron):
        fw = framework_from_mesh(regular_octahedron)
        assert dof_count(fw) == 3 * 6 - 12 == 6

    def test_quadrilateral_cycle(self):
        fw = Framework(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float),
                       np.array([[0, 1], [1, 2], [2, 3], [3, 0]]))
        assert dof_count(fw) == 3 * 4 - 4 == 8

    def test_single_bar(self):
        fw = Framework(np.array([[0, 0, 0], [1, 0, 0]], float), np.array([[0, 1]]))
        assert dof_count(fw) == 5


class TestRigidityMatrix:
    def test_single_bar_row(self):
        fw = Framework(np.array([[0, 0, 0], [1, 0, 0]], float), np.array([[0, 1]]))
        R = rigidity_matrix(fw)
        assert R.shape == (1, 6)
        np.testing.assert_allclose(R[0], [-1, 0, 0, 1, 0, 0])

    def test_unit_tetrahedron_rank(self, unit_tetrahedron):
        R = rigidity_matrix(framework_from_mesh(unit_tetrahedron))
        assert R.shape == (6, 12)
        assert np.linalg.matrix_rank(R) == 6  # = 3*4 - 6: isostatic

    def test_octahedron_rank(self, regular_octahedron):
        R = rigidity_matrix(framework_from_mesh(regular_octahedron))
        assert R.shape == (12, 18)
        assert np.linalg.matrix_rank(R) == 12

    def test_half_jacobian_of_squared_lengths(self):
        rng = np.random.default_rng(0)
        joints = rng.normal(size=(4, 3))
        bars = np.array([[0, 1], [1, 2], [2, 3], [0, 2]])
        fw = Framework(joints, bars)
        R = rigidity_matrix(fw)
        h = 1e-7
        x = joints.ravel()
        for row, (i, j) in enumerate(bars):
            for col in range(12):
                xp = x.copy()
                xp[col] += h
                pp = xp.reshape(4, 3)
                f1 = np.sum((pp[i] - pp[j]) ** 2)
                f0 = np.sum((joints[i] - joints[j]) ** 2)
                assert (f1 - f0) / h == pytest.approx(2 * R[row, col], abs=1e-5)


class TestAnalyze:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_convex_hull_is_rigid(self, seed):
        mesh = random_convex_hull_mesh(seed)
        rep = analyze(framework_from_mesh(mesh))
        assert rep.flex_modes == []
        assert rep.matrix_rank == 3 * len(mesh.vertices) - 6
        assert rep.is_isostatic

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_hull_minus_edge_has_one_mode(self, seed):
        mesh = random_convex_hull_mesh(seed)
        fw = framework_from_mesh(mesh)
        bars = fw.bars[1:]  # drop one bar
        rep = analyze(Framework(fw.joints, bars))
        assert len(rep.flex_modes) == 1

    def test_bricard_twin_has_one_mode(self):
        tw = catalog("bricard1")
        rep = analyze(framework_from_mesh(tw.mesh))
        assert len(rep.flex_modes) == 1
        assert not rep.is_isostatic  # 12 bars but rank 11: one self-stress

    def test_flex_modes_annihilate_rows(self):
        tw = catalog("twinned_anticupola")
        fw = framework_from_mesh(tw.mesh)
        R = rigidity_matrix(fw)
        scale = np.abs(R).max()
        for mode in analyze(fw).flex_modes:
            residual = R @ mode.ravel()
            assert np.abs(residual).max() < 1e-9 * scale

    def test_rank_invariant_under_rigid_motion(self, regular_octahedron):
        fw = framework_from_mesh(regular_octahedron)
        base = analyze(fw).matrix_rank
        for seed in range(4):
            R, t = random_rigid_motion(seed + 20)
            moved = Framework(fw.joints @ R.T + t, fw.bars)
            assert analyze(moved).matrix_rank == base

    def test_report_json_shape(self, unit_tetrahedron):
        rep = analyze(framework_from_mesh(unit_tetrahedron))
        d = rep.to_dict()
        assert set(d) == {"dof", "rank", "trivial", "flex_modes", "isostatic", "singular_values"}
        assert d["dof"] == 6 and d["isostatic"] is True

    def test_collinear_has_five_trivial_motions(self):
        joints = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0]], float)
        assert trivial_motion_basis(joints).shape[1] == 5

    def test_coincident_joints_rejected(self):
        fw = Framework(np.zeros((3, 3)), np.empty((0, 2), dtype=int))
        with pytest.raises(MeshError, match="degenerate"):
            analyze(fw)

    def test_bad_tolerance_rejected(self, unit_tetrahedron):
        with pytest.raises(ValueError, match="tolerance"):
            analyze(framework_from_mesh(unit_tetrahedron), tol=0.5)


class TestFrameworkValidation:
    def test_duplicate_bar(self):
        with pytest.raises(MeshError, match="duplicate"):
            Framework(np.eye(3), np.array([[0, 1], [1, 0]]))

    def test_self_loop(self):
        with pytest.raises(MeshError, match="itself"):
            Framework(np.eye(3), np.array([[1, 1]]))

    def test_missing_joint(self):
        with pytest.raises(MeshError, match="missing"):
            Framework(np.eye(3), np.array([[0, 5]]))
