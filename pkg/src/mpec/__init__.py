"""Modeling, reformulation and diagnosis of MPECs with affine equilibrium constraints."""

from .diagnostics import (check_cq, classify_matrix, min_norm_multipliers, probe_sbcq,
                          stackelberg_values)
from .global_solve import enumerate_regimes, global_solve, regime_polyhedron, solve_qp_on_polyhedron
from .lower import (AviInstance, Box, Orthant, project_box, project_orthant, project_polyhedron,
                    reaction_map, solve_avi, solve_fb_newton, solve_lcp_enumerate)
from .model import (AffineMpec, GeneralMpec, Polyhedron, QuadraticForm, builtin, eval_F, eval_g,
                    eval_slack, validate)
from .reformulate import (build_fb, build_implicit, build_kkt, build_normal_map, fb_value,
                          natural_residual, residual_theta)

__version__ = "0.1.0"

__all__ = [
    "AffineMpec",
    "AviInstance",
    "Box",
    "GeneralMpec",
    "Orthant",
    "Polyhedron",
    "QuadraticForm",
    "build_fb",
    "build_implicit",
    "build_kkt",
    "build_normal_map",
    "builtin",
    "check_cq",
    "classify_matrix",
    "enumerate_regimes",
    "eval_F",
    "eval_g",
    "eval_slack",
    "fb_value",
    "global_solve",
    "min_norm_multipliers",
    "natural_residual",
    "probe_sbcq",
    "project_box",
    "project_orthant",
    "project_polyhedron",
    "reaction_map",
    "regime_polyhedron",
    "residual_theta",
    "solve_avi",
    "solve_fb_newton",
    "solve_lcp_enumerate",
    "solve_qp_on_polyhedron",
    "stackelberg_values",
    "validate",
]
