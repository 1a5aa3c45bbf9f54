"""Numerical verification of three-dimensional almost cosymplectic structures."""

from .acm import AcmStructure, adapted_frame, estimate_kappa_and_theorem_residual
from .chart import ChartBox, HalfSpace, MetricField, ScalarField, VectorFieldDef
from .curvature import christoffel, cotton_check, curvature_at
from .exprlang import eval_expr, parse_expr
from .families import build_fu, build_kappa0, build_kappa_nonzero, build_product, build_z2
from .jets import Jet3, jet_variable
from .ode import solve_t_ode

__all__ = [
    "AcmStructure",
    "ChartBox",
    "HalfSpace",
    "Jet3",
    "MetricField",
    "ScalarField",
    "VectorFieldDef",
    "adapted_frame",
    "build_fu",
    "build_kappa0",
    "build_kappa_nonzero",
    "build_product",
    "build_z2",
    "christoffel",
    "cotton_check",
    "curvature_at",
    "estimate_kappa_and_theorem_residual",
    "eval_expr",
    "jet_variable",
    "parse_expr",
    "solve_t_ode",
]
