"""Boundary Jacobi fields along a geodesic: integration, focal points, index forms, verification."""
from .fields import (
    CurvatureField,
    constant_field,
    cusp_field,
    dip_field,
    kahler_dim,
    model_field,
    model_matrix,
    random_admissible_field,
)
from .index import (
    IndexFormResult,
    Profile,
    hopf_profile,
    index_form,
    pair_index_form,
    pair_profile,
    sn_profile,
    verify_basic_inequality,
)
from .integrator import JacobiTrajectory, first_focal, integrate, integrate_batch
from .verify import verify_kahler_comparison, verify_real_comparison

__all__ = [
    "CurvatureField", "constant_field", "cusp_field", "dip_field", "kahler_dim", "model_field",
    "model_matrix", "random_admissible_field",
    "IndexFormResult", "Profile", "hopf_profile", "index_form", "pair_index_form", "pair_profile",
    "sn_profile", "verify_basic_inequality",
    "JacobiTrajectory", "first_focal", "integrate", "integrate_batch",
    "verify_kahler_comparison", "verify_real_comparison",
]
