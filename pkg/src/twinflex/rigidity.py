"""Bar-joint rigidity analysis: DOF counts, rigidity matrix, flex modes.

The infinitesimal flexes of a framework are the null vectors of its rigidity
matrix with the rigid-body motions projected out. The trivial-motion space is
computed explicitly (translations plus linearized rotations about the
centroid) rather than assumed six-dimensional, so collinear or coincident
degenerate inputs are counted correctly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError
from .geometry import TriMesh

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class Framework:
    """Joints in space connected by inextensible bars."""

    joints: np.ndarray
    bars: np.ndarray

    def __post_init__(self):
        joints = np.asarray(self.joints, dtype=float)
        bars = np.asarray(self.bars, dtype=int)
        if bars.size == 0:
            bars = bars.reshape(0, 2)
        if joints.ndim != 2 or joints.shape[1] != 3:
            raise MeshError(f"joints must be (V, 3), got {joints.shape}")
        if bars.ndim != 2 or bars.shape[1] != 2:
            raise MeshError(f"bars must be (E, 2), got {bars.shape}")
        if not np.all(np.isfinite(joints)):
            raise MeshError("joint coordinates must be finite")
        n = len(joints)
        seen = set()
        for a, b in bars:
            if a == b:
                raise MeshError(f"bar ({a},{b}) joins a joint to itself")
            if not (0 <= a < n and 0 <= b < n):
                raise MeshError(f"bar ({a},{b}) references a missing joint")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise MeshError(f"duplicate bar {key}")
            seen.add(key)
        j = np.ascontiguousarray(joints)
        b = np.ascontiguousarray(bars)
        j.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "joints", j)
        object.__setattr__(self, "bars", b)

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    @property
    def num_bars(self) -> int:
        return len(self.bars)


def framework_from_mesh(mesh: TriMesh, coords: np.ndarray | None = None) -> Framework:
    """The mesh's vertices and derived edges, viewed as joints and bars."""
    pts = mesh.vertices if coords is None else np.asarray(coords, dtype=float)
    return Framework(pts, mesh.edges())


def dof_count(framework: Framework) -> int:
    """Heuristic degree-of-freedom count 3V - E (rigid-body motions included)."""
    return 3 * framework.num_joints - framework.num_bars


def rigidity_matrix(framework: Framework) -> np.ndarray:
    """E x 3V matrix; row (i,j) holds p_i - p_j in block i and its negative in block j.

    Equals half the Jacobian of the squared bar lengths with respect to the
    stacked joint coordinates.
    """
    V, E = framework.num_joints, framework.num_bars
    R = np.zeros((E, 3 * V))
    p = framework.joints
    for row, (i, j) in enumerate(framework.bars):
        d = p[i] - p[j]
        R[row, 3 * i:3 * i + 3] = d
        R[row, 3 * j:3 * j + 3] = -d
    return R


def trivial_motion_basis(joints: np.ndarray) -> np.ndarray:
    """Orthonormal basis (3V x t) of rigid-body velocities at this configuration.

    Three translations plus three linearized rotations about the centroid;
    degenerate geometries (coincident or collinear joints) span fewer than six.
    """
    joints = np.asarray(joints, dtype=float)
    V = len(joints)
    c = joints.mean(axis=0)
    gens = []
    for k in range(3):
        t = np.zeros((V, 3))
        t[:, k] = 1.0
        gens.append(t.ravel())
    for k in range(3):
        axis = np.zeros(3)
        axis[k] = 1.0
        gens.append(np.cross(axis, joints - c).ravel())
    G = np.column_stack(gens)
    u, s, _ = np.linalg.svd(G, full_matrices=False)
    scale = max(1.0, float(np.abs(joints - c).max()))
    rank = int(np.sum(s > 1e-12 * np.sqrt(V) * scale))
    return u[:, :rank]


@dataclass(frozen=True)
class RigidityReport:
    dof_count: int
    matrix_rank: int
    trivial_motions: int
    flex_modes: list[np.ndarray]
    is_isostatic: bool
    singular_values: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "dof": self.dof_count,
            "rank": self.matrix_rank,
            "trivial": self.trivial_motions,
            "flex_modes": [m.ravel().tolist() for m in self.flex_modes],
            "isostatic": self.is_isostatic,
            "singular_values": [float(s) for s in self.singular_values],
        }


def analyze(framework: Framework, tol: float = DEFAULT_RANK_TOL) -> RigidityReport:
    """Rank/flex-mode analysis of the rigidity matrix.

    Rank counts singular values above `tol` relative to the largest; the flex
    modes are a null-space basis orthogonalized against the trivial motions.
    Raw singular values are kept in the report so borderline configurations
    (symmetric twins near branch points) can be judged by the caller.
    """
    if not 0 < tol < 1e-3:
        raise ValueError(f"rank tolerance must lie in (0, 1e-3), got {tol}")
    p = framework.joints
    if len(p) == 0:
        raise MeshError("framework has no joints")
    if np.allclose(p, p[0], atol=1e-15):
        raise MeshError("all joints coincide; geometry is degenerate")

    V, E = framework.num_joints, framework.num_bars
    R = rigidity_matrix(framework)
    T = trivial_motion_basis(p)
    t = T.shape[1]

    if E == 0:
        null = np.eye(3 * V)
        s = np.zeros(0)
        rank = 0
    else:
        _, s, vt = np.linalg.svd(R, full_matrices=True)
        rank = int(np.sum(s > tol * s[0]))
        null = vt[rank:].T  # 3V x (3V - rank)

    # project rigid-body motions out of the null space
    C = null - T @ (T.T @ null)
    if C.size:
        u2, s2, _ = np.linalg.svd(C, full_matrices=False)
        keep = s2 > 0.5
        modes = [u2[:, k].reshape(V, 3) for k in range(C.shape[1]) if keep[k]]
    else:
        modes = []

    return RigidityReport(
        dof_count=3 * V - E,
        matrix_rank=rank,
        trivial_motions=t,
        flex_modes=modes,
        is_isostatic=(rank == E and not modes),
        singular_values=s,
    )
