"""Exact valuative-tree computations for plane polynomial dynamics."""
from .blowup import (
    INFINITY,
    LOCAL,
    BlowupError,
    BlowupSeq,
    DualGraph,
    Free,
    GroundFieldError,
    Root,
    Satellite,
    dual_graph,
    export_graph,
    log_resolution,
)
from .dynamics import (
    DynamicsError,
    InfinityReport,
    LocalReport,
    analyze_infinity,
    analyze_local,
    find_fixed_point,
    sequences,
)
from .numbers import Quad, QuadraticInt, quad_from_lattice
from .poly import Ideal, Poly, PolyMap, parse_poly
from .potential import AtomicMeasure, TreeFn, laplacian, laplacian_log_ideal, poisson_solve
from .valuation import Valuation, compare, locate, monomial, retract, wedge

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "LOCAL", "BlowupError", "BlowupSeq", "DualGraph", "Free", "GroundFieldError", "Root",
    "Satellite", "dual_graph", "export_graph", "log_resolution", "DynamicsError", "InfinityReport",
    "LocalReport", "analyze_infinity", "analyze_local", "find_fixed_point", "sequences", "Quad",
    "QuadraticInt", "quad_from_lattice", "Ideal", "Poly", "PolyMap", "parse_poly", "AtomicMeasure",
    "TreeFn", "laplacian", "laplacian_log_ideal", "poisson_solve", "Valuation", "compare", "locate",
    "monomial", "retract", "wedge",
]
