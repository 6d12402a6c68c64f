import numpy as np
import pytest
from scipy.spatial import ConvexHull

from twinflex.geometry import TriMesh, orient_faces


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    reports = []
    for key in ("passed", "failed"):
        reports += terminalreporter.stats.get(key, [])
    acc = [r for r in reports if getattr(r, "when", "") == "call" and "test_acceptance" in r.nodeid]
    if not acc:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for r in sorted(acc, key=lambda r: r.nodeid):
        name = r.nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if r.passed else 'FAIL'}  {name}")


def build_mesh(vertices, faces, labels=None) -> TriMesh:
    verts = np.asarray(vertices, dtype=float)
    return TriMesh(verts, orient_faces(verts, faces), labels or {})


@pytest.fixture
def unit_tetrahedron() -> TriMesh:
    return build_mesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
    )


@pytest.fixture
def regular_octahedron() -> TriMesh:
    verts = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    faces = [
        [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
        [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
    ]
    return build_mesh(verts, faces)


@pytest.fixture
def cube2() -> TriMesh:
    """Axis-aligned cube of side 2, triangulated."""
    verts = [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    faces = [
        [0, 1, 3], [0, 3, 2], [4, 6, 7], [4, 7, 5],
        [0, 4, 5], [0, 5, 1], [2, 3, 7], [2, 7, 6],
        [0, 2, 6], [0, 6, 4], [1, 5, 7], [1, 7, 3],
    ]
    return build_mesh(verts, faces)


def random_convex_hull_mesh(seed: int, n_points: int = 10) -> TriMesh:
    """Triangulated convex hull of random points; generic, hence rigid."""
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n_points, 3))
    hull = ConvexHull(pts)
    used = sorted(set(hull.simplices.ravel().tolist()))
    remap = {v: i for i, v in enumerate(used)}
    verts = pts[used]
    faces = [[remap[v] for v in simplex] for simplex in hull.simplices]
    return build_mesh(verts, faces)


def random_rigid_motion(seed: int):
    """A rotation matrix and translation vector, deterministic per seed."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(A)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q, rng.normal(size=3)
