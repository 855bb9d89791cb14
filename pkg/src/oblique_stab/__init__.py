"""Oblique-projection feedback stabilisation of 1D reaction-diffusion systems.

The package builds oblique projections onto spans of indicator actuators
along spectral complements of the Laplacian, exposes the closed-form
operator-norm results for the standard placements, and simulates the
explicit-feedback closed loop with hat-function finite elements and
Crank-Nicolson time stepping.
"""

from .actuators import ActuatorSet, Scheme, place
from .errors import (
    ConstraintViolationError,
    DirectSumFailureError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    NumericalFailureError,
    SingularConfigurationError,
    SingularMatrixError,
)
from .fem import (
    ClosedLoopRun,
    FeedbackConfig,
    FeedbackOperator,
    assemble_fem,
    constant_reaction,
    discrete_projection_norm,
    feedback_apply,
    feedback_matrices,
    make_grid,
    nodal_l2_norm,
    oscillating_reaction,
    project_nodal,
    run_closed_loop,
    tabulated_reaction,
)
from .projection import (
    CrossGram,
    ProjectionData,
    SufficientConditionReport,
    analytic_theta_spectrum,
    analytic_vartheta,
    apply_adjoint_projection,
    apply_projection,
    assemble_cross_gram,
    build_projection,
    check_sufficient_condition,
    check_theta_diagonal,
    cosine_sum,
    op_norm_limit,
    orthogonal_projection_actuators,
    vartheta_limit,
)
from .spectral import BoundaryCondition, EigenBasis, build_basis, eval_eigenfunction

__version__ = "0.1.0"

__all__ = [
    "ActuatorSet",
    "BoundaryCondition",
    "ClosedLoopRun",
    "ConstraintViolationError",
    "CrossGram",
    "DirectSumFailureError",
    "EigenBasis",
    "FeedbackConfig",
    "FeedbackOperator",
    "InvalidArgumentError",
    "NotPositiveDefiniteError",
    "NumericalFailureError",
    "ProjectionData",
    "Scheme",
    "SingularConfigurationError",
    "SingularMatrixError",
    "SufficientConditionReport",
    "analytic_theta_spectrum",
    "analytic_vartheta",
    "apply_adjoint_projection",
    "apply_projection",
    "assemble_cross_gram",
    "assemble_fem",
    "build_basis",
    "build_projection",
    "check_sufficient_condition",
    "check_theta_diagonal",
    "constant_reaction",
    "cosine_sum",
    "discrete_projection_norm",
    "eval_eigenfunction",
    "feedback_apply",
    "feedback_matrices",
    "make_grid",
    "nodal_l2_norm",
    "op_norm_limit",
    "orthogonal_projection_actuators",
    "oscillating_reaction",
    "place",
    "project_nodal",
    "run_closed_loop",
    "tabulated_reaction",
    "vartheta_limit",
    "__version__",
]
