"""Finite flex tracing by Newton continuation on the edge-length constraints.

A frame solves: every edge keeps its target length, six gauge rows pin the
rigid-body motions, and one or more driver rows prescribe the flex parameter
(a vertex-pair distance or a dihedral angle). Squared lengths keep the system
polynomial, scaled by the mean squared edge length so the residual is
dimensionless. Paths are traced frame to frame with adaptive sub-stepping;
a path that stops converging at the minimal step has reached the boundary of
the motion range and is returned truncated with a reason.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolveError, SymmetryError
from .geometry import TriMesh, bbox_diameter, signed_volume
from .rigidity import Framework, analyze, framework_from_mesh
from .symmetry import TYPE_I, apply_isometry, quad_isometry
from .twinning import Crinkle, Twin

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 8
BIFURCATION_SV_REL = 1e-8


@dataclass(frozen=True)
class DistanceDriver:
    """Drives the distance between two vertices."""

    i: int
    j: int

    def value(self, coords: np.ndarray) -> float:
        return float(np.linalg.norm(coords[self.i] - coords[self.j]))

    def describe(self) -> list:
        return ["distance", self.i, self.j]


@dataclass(frozen=True)
class DihedralDriver:
    """Drives the signed dihedral angle across an interior edge.

    The angle is measured between the normals of the two faces listed in
    `faces` (index triples), positive by the right-hand rule about the edge
    i -> j. Useful where a diagonal driver degenerates (flat configurations).
    """

    i: int
    j: int
    faces: tuple[tuple[int, int, int], tuple[int, int, int]]

    def value(self, coords: np.ndarray) -> float:
        axis = coords[self.j] - coords[self.i]
        axis = axis / np.linalg.norm(axis)
        normals = []
        for tri in self.faces:
            p0, p1, p2 = coords[list(tri)]
            n = np.cross(p1 - p0, p2 - p0)
            normals.append(n / np.linalg.norm(n))
        n1, n2 = normals
        return float(np.arctan2(np.dot(np.cross(n1, n2), axis), np.dot(n1, n2)))

    def describe(self) -> list:
        return ["dihedral", self.i, self.j]


@dataclass
class FlexProblem:
    """Constraint system for one flexing model.

    `gauge_rows` is a (6, 3V) linear system A x = b fixing a vertex, a ray and
    a plane; drivers add one row each; `pinned_pairs` holds phantom distances
    frozen at their construction values; `monitor_pairs` are measured into the
    per-frame diagnostics without constraining anything.
    """

    framework: Framework
    target_lengths: dict[tuple[int, int], float]
    drivers: list
    gauge_rows: tuple[np.ndarray, np.ndarray]
    pinned_pairs: list[tuple[int, int, float]] = field(default_factory=list)
    monitor_pairs: list[tuple[int, int]] = field(default_factory=list)
    mesh: TriMesh | None = None
    twin: Twin | None = None

    @property
    def num_vertices(self) -> int:
        return self.framework.num_joints

    def driver_values(self, coords: np.ndarray) -> np.ndarray:
        return np.array([d.value(coords) for d in self.drivers])


def gauge_for(coords: np.ndarray, pinned: tuple[int, int, int] | None = None):
    """Linear gauge rows (A, b) pinning vertex v0, a ray at v1 and a plane at v2.

    Vertices default to a well-conditioned triple: v0 arbitrary, v1 farthest
    from it, v2 farthest from the line v0-v1.
    """
    pts = np.asarray(coords, dtype=float)
    V = len(pts)
    if pinned is None:
        v0 = 0
        v1 = int(np.argmax(np.linalg.norm(pts - pts[v0], axis=1)))
        u = pts[v1] - pts[v0]
        u = u / np.linalg.norm(u)
        perp = pts - pts[v0] - np.outer((pts - pts[v0]) @ u, u)
        v2 = int(np.argmax(np.linalg.norm(perp, axis=1)))
    else:
        v0, v1, v2 = pinned
        u = pts[v1] - pts[v0]
        u = u / np.linalg.norm(u)
    if len({v0, v1, v2}) != 3:
        raise SolveError("gauge vertices are not distinct; geometry too degenerate", "degenerate_gauge")

    # orthonormal frame transverse to the ray
    probe = np.zeros(3)
    probe[int(np.argmin(np.abs(u)))] = 1.0
    w1 = np.cross(u, probe)
    w1 /= np.linalg.norm(w1)
    w2 = np.cross(u, w1)
    n = np.cross(u, pts[v2] - pts[v0])
    nn = np.linalg.norm(n)
    if nn < 1e-12 * bbox_diameter(pts):
        raise SolveError("gauge vertices are collinear", "degenerate_gauge")
    n /= nn

    A = np.zeros((6, 3 * V))
    b = np.zeros(6)
    A[0, 3 * v0], A[1, 3 * v0 + 1], A[2, 3 * v0 + 2] = 1.0, 1.0, 1.0
    b[0:3] = pts[v0]
    A[3, 3 * v1:3 * v1 + 3] = w1
    b[3] = w1 @ pts[v1]
    A[4, 3 * v1:3 * v1 + 3] = w2
    b[4] = w2 @ pts[v1]
    A[5, 3 * v2:3 * v2 + 3] = n
    b[5] = n @ pts[v2]
    return A, b


def _default_crinkle_driver(crinkle: Crinkle) -> DistanceDriver:
    """First boundary chord that is neither an edge nor a phantom pair.

    Phantom distances are the quantities the crinkle holds fixed, so they make
    useless drivers; a free chord of the boundary loop tracks the flex."""
    loop = crinkle.boundary
    edges = {tuple(e) for e in crinkle.mesh.edges().tolist()}
    phantoms = set(crinkle.phantom_pairs)
    n = len(loop)
    for gap in range(2, n - 1):
        for i in range(n):
            u, v = loop[i], loop[(i + gap) % n]
            key = (min(u, v), max(u, v))
            if key not in edges and key not in phantoms:
                return DistanceDriver(*key)
    raise SolveError("crinkle boundary has no free chord; pass a driver explicitly", "missing_driver")


def problem_for(obj, drivers=None, pin_phantoms=(), gauge_vertices=None) -> FlexProblem:
    """Build the flex constraint system for a Twin, Crinkle or TriMesh.

    Twins default to driving the removed diagonal AA'; crinkles default to
    the boundary diagonal transverse to the first phantom pair. Phantom pairs
    named in `pin_phantoms` are frozen at their construction distance; the
    rest are monitored in the diagnostics.
    """
    twin_obj = obj if isinstance(obj, Twin) else None
    crinkle = obj if isinstance(obj, Crinkle) else None
    mesh = obj if isinstance(obj, TriMesh) else obj.mesh
    fw = framework_from_mesh(mesh)
    lengths = {
        (int(a), int(b)): float(np.linalg.norm(mesh.vertices[a] - mesh.vertices[b]))
        for a, b in mesh.edges()
    }

    monitor = []
    pinned = []
    if drivers is None:
        if twin_obj is not None:
            a, _, a2, _ = twin_obj.equator
            drivers = [DistanceDriver(a, a2)]
        elif crinkle is not None:
            drivers = [_default_crinkle_driver(crinkle)]
        else:
            raise SolveError("a bare mesh needs explicit drivers", "missing_driver")
    if crinkle is not None:
        for pair in crinkle.phantom_pairs:
            if pair in pin_phantoms or tuple(reversed(pair)) in pin_phantoms:
                d = float(np.linalg.norm(mesh.vertices[pair[0]] - mesh.vertices[pair[1]]))
                pinned.append((pair[0], pair[1], d))
            monitor.append(pair)

    gauge = gauge_for(mesh.vertices, gauge_vertices)
    return FlexProblem(
        framework=fw,
        target_lengths=lengths,
        drivers=list(drivers),
        gauge_rows=gauge,
        pinned_pairs=pinned,
        monitor_pairs=monitor,
        mesh=mesh,
        twin=twin_obj,
    )


# -- Newton solve ------------------------------------------------------------


def _scales(problem: FlexProblem) -> tuple[float, float]:
    L2 = np.array([l * l for l in problem.target_lengths.values()])
    s = float(L2.mean())
    return s, np.sqrt(s)


def _residual_and_jacobian(problem: FlexProblem, x: np.ndarray, targets: np.ndarray, want_jac=True):
    V = problem.num_vertices
    pts = x.reshape(V, 3)
    s, slin = _scales(problem)
    edges = list(problem.target_lengths.items())
    A, b = problem.gauge_rows
    n_rows = len(edges) + 6 + len(problem.drivers) + len(problem.pinned_pairs)
    r = np.zeros(n_rows)
    J = np.zeros((n_rows, 3 * V)) if want_jac else None

    row = 0
    for (i, j), L in edges:
        d = pts[i] - pts[j]
        r[row] = (d @ d - L * L) / s
        if want_jac:
            J[row, 3 * i:3 * i + 3] = 2.0 * d / s
            J[row, 3 * j:3 * j + 3] = -2.0 * d / s
        row += 1
    r[row:row + 6] = (A @ x - b) / slin
    if want_jac:
        J[row:row + 6] = A / slin
    row += 6
    for k, drv in enumerate(problem.drivers):
        if isinstance(drv, DistanceDriver):
            d = pts[drv.i] - pts[drv.j]
            r[row] = (d @ d - targets[k] ** 2) / s
            if want_jac:
                J[row, 3 * drv.i:3 * drv.i + 3] = 2.0 * d / s
                J[row, 3 * drv.j:3 * drv.j + 3] = -2.0 * d / s
        else:
            r[row] = drv.value(pts) - targets[k]
            if want_jac:
                # dihedral rows are few; forward differences are accurate enough here
                h = 1e-7 * max(1.0, slin)
                for col in range(3 * V):
                    xp = x.copy()
                    xp[col] += h
                    J[row, col] = (drv.value(xp.reshape(V, 3)) - drv.value(pts)) / h
        row += 1
    for i, j, dist in problem.pinned_pairs:
        d = pts[i] - pts[j]
        r[row] = (d @ d - dist * dist) / s
        if want_jac:
            J[row, 3 * i:3 * i + 3] = 2.0 * d / s
            J[row, 3 * j:3 * j + 3] = -2.0 * d / s
        row += 1
    return r, J


def solve_frame(problem: FlexProblem, driver_values, initial_guess: np.ndarray):
    """Damped Newton from the seed; returns (coords, info).

    info carries iteration count, the final scaled residual, the smallest
    singular value of the constraint Jacobian, and a bifurcation flag when
    that value is effectively zero (branch point of the motion).
    """
    targets = np.atleast_1d(np.asarray(driver_values, dtype=float))
    if len(targets) != len(problem.drivers):
        raise SolveError(
            f"{len(problem.drivers)} drivers need {len(problem.drivers)} values, got {len(targets)}",
            "bad_driver_values",
        )
    x = np.asarray(initial_guess, dtype=float).ravel().copy()
    if x.size != 3 * problem.num_vertices:
        raise SolveError("initial guess has the wrong size", "bad_initial_guess")

    r, J = _residual_and_jacobian(problem, x, targets)
    norm = np.abs(r).max()
    for it in range(NEWTON_MAX_ITER):
        if norm < NEWTON_TOL:
            break
        dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        step = 1.0
        for _ in range(30):
            r_new, _ = _residual_and_jacobian(problem, x + step * dx, targets, want_jac=False)
            if np.abs(r_new).max() < (1.0 - 0.25 * step) * norm or np.abs(r_new).max() < NEWTON_TOL:
                break
            step *= 0.5
        else:
            raise SolveError(f"line search stalled at residual {norm:.3e}", "newton_stall")
        x = x + step * dx
        r, J = _residual_and_jacobian(problem, x, targets)
        norm = np.abs(r).max()
    else:
        raise SolveError(
            f"Newton did not reach {NEWTON_TOL:g} in {NEWTON_MAX_ITER} iterations (residual {norm:.3e})",
            "newton_divergence",
        )
    sv = np.linalg.svd(J, compute_uv=False)
    min_sv = float(sv[-1] if len(sv) else 0.0)
    info = {
        "iterations": it,
        "residual": float(norm),
        "min_sv": min_sv,
        "bifurcation": bool(len(sv) and sv[-1] < BIFURCATION_SV_REL * sv[0]),
    }
    return x.reshape(problem.num_vertices, 3), info


# -- paths -------------------------------------------------------------------


@dataclass(frozen=True)
class FrameDiag:
    edge_err: float
    volume: float | None
    sym_residual: float | None
    min_sv: float
    phantoms: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "edge_err": self.edge_err,
            "volume": self.volume,
            "sym_residual": self.sym_residual,
            "min_sv": self.min_sv,
            "phantoms": list(self.phantoms),
        }


@dataclass(frozen=True)
class Frame:
    t: tuple[float, ...]
    coords: np.ndarray
    diag: FrameDiag


@dataclass(frozen=True)
class FlexPath:
    drivers: tuple
    frames: tuple[Frame, ...]
    status: str  # "complete" | "locked"
    lock_reason: str | None = None

    def coords(self, idx: int) -> np.ndarray:
        return self.frames[idx].coords

    def driver_schedule(self) -> np.ndarray:
        return np.array([f.t for f in self.frames])

    def to_dict(self) -> dict:
        return {
            "driver": [d.describe() for d in self.drivers],
            "status": self.status,
            "lock_reason": self.lock_reason,
            "frames": [
                {
                    "t": list(f.t) if len(f.t) > 1 else f.t[0],
                    "vertices": f.coords.tolist(),
                    "diag": f.diag.to_dict(),
                }
                for f in self.frames
            ],
        }


def max_edge_error(problem: FlexProblem, coords: np.ndarray) -> float:
    pts = np.asarray(coords)
    err = 0.0
    for (i, j), L in problem.target_lengths.items():
        err = max(err, abs(float(np.linalg.norm(pts[i] - pts[j])) - L) / L)
    return err


def equator_residual(coords: np.ndarray, twin: Twin) -> float:
    """Largest gap between each transformed vertex and its paired partner.

    The symmetry line (type I) or plane (type II) is recomputed from the
    current equator coordinates; edge preservation guarantees the quad still
    satisfies the symmetry conditions, so only degenerate equators fail.
    """
    pts = np.asarray(coords, dtype=float)
    quad = pts[list(twin.equator)]
    iso = quad_isometry(quad, twin.kind, tol=1e-6)
    perm = twin.vertex_permutation()
    sent = apply_isometry(iso, pts)
    return float(np.linalg.norm(sent - pts[perm], axis=1).max())


def _diagnose(problem: FlexProblem, coords: np.ndarray, info: dict) -> FrameDiag:
    vol = None
    if problem.mesh is not None and problem.mesh.is_closed():
        vol = signed_volume(problem.mesh, coords)
    sym = None
    if problem.twin is not None:
        try:
            sym = equator_residual(coords, problem.twin)
        except SymmetryError:
            sym = float("nan")
    phantoms = tuple(
        float(np.linalg.norm(coords[i] - coords[j])) for i, j in problem.monitor_pairs
    )
    return FrameDiag(
        edge_err=max_edge_error(problem, coords),
        volume=vol,
        sym_residual=sym,
        min_sv=info["min_sv"],
        phantoms=phantoms,
    )


def _reject_underdetermined(problem: FlexProblem) -> None:
    """A trace must pin every degree of freedom: k drivers for a k-DOF model,
    counting pinned phantom distances as bars. Underdetermined traces are
    rejected rather than silently regularized."""
    fw = problem.framework
    bars = fw.bars.tolist() + [[i, j] for i, j, _ in problem.pinned_pairs]
    modes = len(analyze(Framework(fw.joints, np.asarray(bars))).flex_modes)
    if len(problem.drivers) < modes:
        raise SolveError(
            f"model has {modes} flex mode(s) after pinning but only "
            f"{len(problem.drivers)} driver(s); add drivers or pin phantom distances",
            "underdetermined",
        )


def trace(problem: FlexProblem, schedule) -> FlexPath:
    """Continuation along the driver schedule with adaptive sub-stepping.

    Each scheduled frame is solved seeded from its predecessor, sub-stepping
    when Newton fails; after eight halvings the mechanism is considered locked
    and the path is returned truncated, with the reason recorded.
    """
    sched = np.atleast_2d(np.asarray(schedule, dtype=float))
    if sched.shape[0] == 1 and len(problem.drivers) == 1 and sched.shape[1] != 1:
        sched = sched.T
    if sched.shape[1] != len(problem.drivers):
        raise SolveError(
            f"schedule has {sched.shape[1]} driver columns, problem has {len(problem.drivers)}",
            "bad_schedule",
        )
    _reject_underdetermined(problem)
    x0 = problem.framework.joints.ravel()
    try:
        coords, info = solve_frame(problem, sched[0], x0)
    except SolveError as exc:
        raise SolveError(f"first frame failed: {exc}", "first_frame_failed") from exc

    frames = [Frame(tuple(sched[0]), coords, _diagnose(problem, coords, info))]
    status, reason = "complete", None

    for nxt in sched[1:]:
        target = np.asarray(nxt, dtype=float)
        pos = np.asarray(frames[-1].t, dtype=float)
        coords = frames[-1].coords
        info = None
        frac = 1.0
        successes = 0
        locked = False
        while True:
            at_target = frac >= 1.0
            step_target = target if at_target else pos + frac * (target - pos)
            try:
                coords, info = solve_frame(problem, step_target, coords.ravel())
            except SolveError:
                frac *= 0.5
                successes = 0
                if frac < 2.0 ** -MAX_HALVINGS:
                    locked = True
                    break
                continue
            pos = step_target
            if at_target:
                break
            successes += 1
            if successes >= 4:
                frac = min(1.0, 2 * frac)
                successes = 0
        if locked:
            status, reason = "locked", "newton failed at minimal step; motion range boundary"
            break
        frames.append(Frame(tuple(target), coords, _diagnose(problem, coords, info)))

    return FlexPath(drivers=tuple(problem.drivers), frames=tuple(frames), status=status, lock_reason=reason)


def find_motion_range(problem: FlexProblem, n_probe: int = 256) -> tuple[float, float]:
    """Empirical feasible interval of a single driver, found by walking to lock.

    Steps start at 1/64 of the driver's construction value, halve on failure,
    double after four successes (capped at 1/16), and stop after eight
    halvings, per the continuation policy.
    """
    if len(problem.drivers) != 1:
        raise SolveError("auto range needs exactly one driver", "bad_schedule")
    _reject_underdetermined(problem)
    d0 = problem.driver_values(problem.framework.joints)[0]
    ref = abs(d0) if d0 else 1.0
    bounds = []
    for sign in (+1.0, -1.0):
        x = problem.framework.joints.ravel()
        val = d0
        step = ref / 64.0
        successes = 0
        halvings = 0
        for _ in range(n_probe):
            try:
                coords, _ = solve_frame(problem, [val + sign * step], x)
                val += sign * step
                x = coords.ravel()
                successes += 1
                if successes >= 4 and step < ref / 16.0:
                    step = min(2 * step, ref / 16.0)
                    successes = 0
            except SolveError:
                step *= 0.5
                successes = 0
                halvings += 1
                if halvings >= MAX_HALVINGS:
                    break
        bounds.append(val)
    hi, lo = bounds
    return float(lo), float(hi)


def certify_finite_flex(twin_obj: Twin, amplitude_rel: float = 0.05, frames_per_side: int = 8) -> dict:
    """Combine the infinitesimal count with an actual trace of the diagonal.

    Reports "finitely_flexible" when the removed diagonal AA' can be driven by
    at least `amplitude_rel` of its construction length in either direction
    with every frame solved; a twin whose very first step fails is flagged
    "infinitesimally_flexible_only" (which should never happen for a twin).
    A model with no flex mode is reported "rigid" and not traced.
    """
    rep = analyze(framework_from_mesh(twin_obj.mesh))
    if not rep.flex_modes:
        return {
            "verdict": "rigid",
            "flex_modes": 0,
            "range": None,
            "amplitude": 0.0,
            "max_edge_err": 0.0,
        }
    problem = problem_for(twin_obj)
    d0 = twin_obj.diagonal_length()
    reach = {}
    worst_err = 0.0
    for sign, key in ((+1.0, "up"), (-1.0, "down")):
        sched = d0 * (1.0 + sign * amplitude_rel * np.linspace(0, 1, frames_per_side + 1))
        try:
            path = trace(problem, sched[:, None])
            reach[key] = float(path.frames[-1].t[0])
            worst_err = max(worst_err, max(f.diag.edge_err for f in path.frames))
        except SolveError:
            reach[key] = d0
    amplitude = max(abs(reach["up"] - d0), abs(d0 - reach["down"]))
    if amplitude <= 1e-12 * d0:
        verdict = "infinitesimally_flexible_only"
    elif amplitude >= amplitude_rel * d0 * (1 - 1e-9):
        verdict = "finitely_flexible"
    else:
        verdict = "partially_flexible"
    return {
        "verdict": verdict,
        "flex_modes": len(rep.flex_modes),
        "range": [reach["down"], reach["up"]],
        "amplitude": amplitude,
        "max_edge_err": worst_err,
    }
