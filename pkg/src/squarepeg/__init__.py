"""Inscribed squares in curves bounded by two 1-Lipschitz graphs.

Corner-curve tracing, inscribed-square detection and verification,
conservation and estimate identities, feasibility of the universal sidelength
constant, opposite-square-corner clouds for general polylines, and a
randomized experiment harness.
"""

from .conservation import (
    ConstantParams,
    QuadrupleTrace,
    conservation_residual,
    constant_feasible,
    constants_table,
    est1_est2_check,
    est3_check,
    lem2_residual,
    line_integral_ydx,
    proph_bound,
    quadruple_from_trace,
)
from .corner_trace import CornerFrame, Trace, collisions, frame_at, solve_u, trace
from .curve import (
    LipschitzPair,
    PiecewiseLinearFunction,
    constant,
    load_pair,
    max_gap,
    random_pair,
    save_pair,
    shrink,
    tent,
)
from .errors import HypothesisViolationError, InvalidInputError, ResolutionInsufficientError
from .harness import ExperimentConfig, ExperimentReport, run_experiment
from .sosc import (
    ParametricPolyline,
    SoscCloud,
    circle_polyline,
    cluster_count,
    ellipse_polyline,
    inscribed_squares_general,
    load_polyline,
    pair_polyline,
    save_polyline,
    sosc_cloud,
)
from .square_finder import (
    CrossingWindow,
    InscribedSquare,
    crossing_window,
    find_squares,
    verify_square,
    vertical_defect,
)
from .svg import emit_svg

__all__ = [
    "ConstantParams",
    "CornerFrame",
    "CrossingWindow",
    "ExperimentConfig",
    "ExperimentReport",
    "HypothesisViolationError",
    "InscribedSquare",
    "InvalidInputError",
    "LipschitzPair",
    "ParametricPolyline",
    "PiecewiseLinearFunction",
    "QuadrupleTrace",
    "ResolutionInsufficientError",
    "SoscCloud",
    "Trace",
    "circle_polyline",
    "cluster_count",
    "collisions",
    "conservation_residual",
    "constant",
    "constant_feasible",
    "constants_table",
    "crossing_window",
    "ellipse_polyline",
    "emit_svg",
    "est1_est2_check",
    "est3_check",
    "find_squares",
    "frame_at",
    "inscribed_squares_general",
    "lem2_residual",
    "line_integral_ydx",
    "load_pair",
    "load_polyline",
    "max_gap",
    "pair_polyline",
    "proph_bound",
    "quadruple_from_trace",
    "random_pair",
    "run_experiment",
    "save_pair",
    "save_polyline",
    "shrink",
    "solve_u",
    "sosc_cloud",
    "tent",
    "trace",
    "verify_square",
    "vertical_defect",
]
