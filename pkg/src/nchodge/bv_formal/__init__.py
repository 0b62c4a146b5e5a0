"""Finite-dimensional differential Z/2-graded BV algebras and canonical coordinates."""
from .algebra import AxiomReport, BVAlgebra, algebra_from_json, algebra_to_json, check_bv_axioms
from .formal import (
    FormalArc,
    MixedSeries,
    PhiResult,
    differential,
    f_transform,
    gauge_transform,
    lifted_residual,
    maurer_cartan_residual,
    phi_t,
    random_lifted_mc,
    random_mc_arc,
)
from .generators import (
    builtin_algebras,
    grassmann_algebra,
    grassmann_contraction,
    grassmann_degenerate,
    grassmann_even_laplacian,
    random_chain_differential,
    square_zero,
    truncated_polynomial,
)
from .homological import DegenerationReport, Splitting, build_splitting, check_degeneration
from .minimal import MinimalModelReport, minimal_model_products_vanish

__all__ = [
    "AxiomReport",
    "BVAlgebra",
    "DegenerationReport",
    "FormalArc",
    "MinimalModelReport",
    "MixedSeries",
    "PhiResult",
    "Splitting",
    "algebra_from_json",
    "algebra_to_json",
    "build_splitting",
    "builtin_algebras",
    "check_bv_axioms",
    "check_degeneration",
    "differential",
    "f_transform",
    "gauge_transform",
    "grassmann_algebra",
    "grassmann_contraction",
    "grassmann_degenerate",
    "grassmann_even_laplacian",
    "lifted_residual",
    "maurer_cartan_residual",
    "minimal_model_products_vanish",
    "phi_t",
    "random_chain_differential",
    "random_lifted_mc",
    "random_mc_arc",
    "square_zero",
    "truncated_polynomial",
]
