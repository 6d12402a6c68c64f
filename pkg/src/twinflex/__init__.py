"""Twinned flexible polyhedra: construction, flex tracing, checking, export.

The public surface mirrors the pipeline: build a model (`catalog`), cut and
glue (`twinning`), trace its motion (`flexion`), test for self-intersections
(`collision`), and unfold it for printing (`netexport`).
"""

from .catalog import catalog, catalog_mesh, model_names, model_schemas
from .collision import intersect_triangles, path_embedding, self_intersections
from .errors import (
    CatalogError,
    ConstructionError,
    DoubleCoverError,
    MeshError,
    NetError,
    SolveError,
    SymmetryError,
)
from .flexion import (
    DihedralDriver,
    DistanceDriver,
    FlexPath,
    FlexProblem,
    certify_finite_flex,
    equator_residual,
    find_motion_range,
    problem_for,
    solve_frame,
    trace,
)
from .geometry import (
    MeshStats,
    TriMesh,
    edge_lengths,
    mesh_stats,
    orient_faces,
    procrustes_residual,
    signed_volume,
)
from .meshio import (
    load_mesh,
    load_mesh_json,
    load_obj,
    mesh_from_dict,
    mesh_to_dict,
    object_from_payload,
    object_payload,
    save_mesh_json,
    save_obj,
)
from .netexport import Net, export_svg, refold, unfold
from .rigidity import Framework, RigidityReport, analyze, dof_count, framework_from_mesh, rigidity_matrix
from .search import EmbeddingScan, search_embedding
from .symmetry import (
    TYPE_I,
    TYPE_II,
    SymmetricQuad,
    SymmetryLine,
    SymmetryPlane,
    apply_half_rotation,
    apply_reflection,
    find_symmetric_quads,
    symmetry_line,
    symmetry_plane,
)
from .twinning import (
    Cap,
    Crinkle,
    Patch,
    Twin,
    erect_tent,
    fit_bricard_crinkle,
    glue_boundaries,
    make_cap,
    make_crinkle,
    replace_hinge_with_crinkles,
    twin,
)

__version__ = "0.1.0"
