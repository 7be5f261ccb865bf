"""Finite element laboratory for the fourth-order operator with dynamic boundary conditions."""

from .coefficients import FieldSpec, ProblemData, check_hypothesis, validate_hypothesis
from .dynamics import (
    decay_envelope_check,
    eventual_positivity_time,
    evolve,
    growth_check,
    nonpositivity_search,
    positivity_probe,
    project_initial_data,
    semigroup_apply,
    steady_state,
)
from .estimator import WentzellBiLaplacian
from .gamma_limit import (
    GammaSweepConfig,
    clamped_reference_2d,
    gamma_monotonicity,
    run_gamma_sweep,
    sign_structure,
)
from .geometry import Mesh, build_disk_mesh, build_interval_mesh, build_square_mesh
from .oracle import BeamParams, clamped_beam_eigenvalues, find_wentzell_eigenvalues_1d
from .spectral import (
    KernelClass,
    apply_operator_blocks,
    boundary_flux_recovery,
    build_operator,
    green_identity_residual,
    kernel_classify,
    rayleigh_quotient,
    solve_spectrum,
)

__version__ = "0.1.0"
