"""Certified search for Rupert passages of convex polyhedra."""

__version__ = "0.1.0"

from .certify import BUFFER_MATRIX, BUFFER_VERTEX, CertOutcome, CheckConfig, check
from .geometry import DegenerateInput, EmptyErosion, PlanarPolygon, buffer, convex_hull, halfplanes
from .lp import FIT_EPS, FitProgram, FitResult, NumericFailure, build_fit_program, fit_scale, verify_certificate
from .nieuwland import PassageCandidate, find_passage, nieuwland_sweep, verify_candidate
from .polyhedron import (
    InvalidParameter,
    ParamPoint,
    Polyhedron,
    canonicalize,
    cube,
    load_polyhedron,
    projection_matrix,
    shadow,
    stellated_tetrahedron,
)
from .search import (
    Box5,
    CheckpointCorrupt,
    SearchConfig,
    SearchState,
    coverage_report,
    initial_decomposition,
    run_search,
    split,
)

__all__ = [
    "BUFFER_MATRIX",
    "BUFFER_VERTEX",
    "Box5",
    "CertOutcome",
    "CheckConfig",
    "CheckpointCorrupt",
    "DegenerateInput",
    "EmptyErosion",
    "FIT_EPS",
    "FitProgram",
    "FitResult",
    "InvalidParameter",
    "NumericFailure",
    "ParamPoint",
    "PassageCandidate",
    "PlanarPolygon",
    "Polyhedron",
    "SearchConfig",
    "SearchState",
    "buffer",
    "build_fit_program",
    "canonicalize",
    "check",
    "convex_hull",
    "coverage_report",
    "cube",
    "find_passage",
    "fit_scale",
    "halfplanes",
    "initial_decomposition",
    "load_polyhedron",
    "nieuwland_sweep",
    "projection_matrix",
    "run_search",
    "shadow",
    "split",
    "stellated_tetrahedron",
    "verify_candidate",
    "verify_certificate",
]
