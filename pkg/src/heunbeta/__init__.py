"""Incomplete-Beta-function series solutions of the general Heun equation."""

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    ConstraintError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    HeunError,
    PoleError,
    QuadratureError,
    StepFailure,
)
from .heun import HeunParams, SolutionSample, integrate, integrate_grid, make_expansion_params, residual
from .series import ExpansionCoefficients, compute_coefficients, evaluate, evaluate_grid, recurrence_coeffs
from .special import SolutionConstants, SpecialCaseParams
from .termination import Case, finite_sum_solution, reduce_to_elementary, spectrum

__all__ = [
    "__version__",
    "CertificationError",
    "ConstraintError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "HeunError",
    "PoleError",
    "QuadratureError",
    "StepFailure",
    "HeunParams",
    "SolutionSample",
    "make_expansion_params",
    "residual",
    "integrate",
    "integrate_grid",
    "ExpansionCoefficients",
    "recurrence_coeffs",
    "compute_coefficients",
    "evaluate",
    "evaluate_grid",
    "Case",
    "spectrum",
    "finite_sum_solution",
    "reduce_to_elementary",
    "SpecialCaseParams",
    "SolutionConstants",
]
