"""Flat sections, adaptive transport and monodromy."""
from .integrator import (
    FlatFrame,
    compiled_available,
    get_backend,
    monodromy,
    set_backend,
    trace_integral,
    transport,
    transport_trajectory,
)
from .paths import PlanePath, path_from_json, path_to_json
from .sections import (
    check_conjugation_identity,
    classical_section,
    conjugating_factor,
    psi_cl_coeffs,
    psi_const,
)

__all__ = [
    "FlatFrame",
    "PlanePath",
    "check_conjugation_identity",
    "classical_section",
    "compiled_available",
    "conjugating_factor",
    "get_backend",
    "monodromy",
    "path_from_json",
    "path_to_json",
    "psi_cl_coeffs",
    "psi_const",
    "set_backend",
    "trace_integral",
    "transport",
    "transport_trajectory",
]
