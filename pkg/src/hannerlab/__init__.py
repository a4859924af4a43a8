"""Exact-arithmetic toolkit for Hanner polytopes and the local behavior of
the volume product near them."""

from .hanner import (
    Graph,
    Leaf,
    Node,
    NotCographError,
    ParseError,
    canonical_trees,
    check_cl_property,
    format_expr,
    graph_of,
    hanner_of_graph,
    parse_expr,
    polar_vertices,
    vertices,
)
from .faces import (
    EMPTY,
    WHOLE,
    AffineFrame,
    affine_frame,
    centroid,
    dual_expr,
    dual_face,
    enumerate_faces,
    face_dim,
    face_leq,
    pairing_gap,
    verify_frame_conditions,
)
from .flags import (
    Flag,
    assemble_flag,
    directional_derivative,
    elimination_determinant_check,
    enumerate_flags,
    phi,
    simplex_volume,
    volume_function,
)
from .geometry import (
    HPolytope,
    VPolytope,
    hausdorff2,
    hull_facets,
    perturb,
    polar,
    project,
    section,
    vertex_form,
    volume,
    volume_product,
    vpolytope,
)
from .witness import (
    Witness,
    build_witness,
    local_min_experiment,
    normalize_position,
    projection_section_diagnostics,
    scaled_centroid_product_check,
    tangency,
    witness_volume_gaps,
)

__version__ = "0.1.0"
