"""Age-period-cohort mixed models: designs, penalized fits, restricted likelihood."""

from ._apcre import (
    __version__,
    build_grid,
    decompose_effect,
    design,
    fe_design,
    fit,
    generate_dataset,
    intercept_redundancy_check,
    null_space_basis,
    orthonormal_poly_basis,
    profiled_rl,
    quadratic_decomposition,
    rank_deficiency,
    re_design,
    restricted_loglik,
    scan_rl_surface,
    solve_penalized,
    transfer_property_check,
    verify_single_re_sweep,
)

__all__ = [
    "__version__",
    "build_grid",
    "decompose_effect",
    "design",
    "fe_design",
    "fit",
    "generate_dataset",
    "intercept_redundancy_check",
    "null_space_basis",
    "orthonormal_poly_basis",
    "profiled_rl",
    "quadratic_decomposition",
    "rank_deficiency",
    "re_design",
    "restricted_loglik",
    "scan_rl_surface",
    "solve_penalized",
    "transfer_property_check",
    "verify_single_re_sweep",
]
