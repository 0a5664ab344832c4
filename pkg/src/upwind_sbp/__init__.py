"""Upwind summation-by-parts operators, SAT boundary treatment and energy-stable WENO fluxes."""

from .errors import (
    DecompositionFailureError,
    DegenerateParametersError,
    InsufficientDataError,
    InvalidArgumentError,
    NumericalBlowupError,
    NumericalFailureError,
    UnsupportedOrderError,
    UpwindSbpError,
)
from .sbp import Grid, UpwindPair, build_grid, build_upwind_pair, verify_sbp
from .weno import WenoOperator, apply_dmw, build_flux_grid, dmw_matrix, nonlinear_weights
from .stabilization import StabilizedWeno, assemble_dmws, extract_lambdas, modify_lambda, symmetric_split
from .sat import AdvectionScheme, SystemScheme, advection_rhs, system_rhs, system_stability_check
from .integrate import IntegratorConfig, integrate, rk4_step
from .experiments import fit_rate, run_convergence, run_four_shapes

__all__ = [
    "AdvectionScheme",
    "DecompositionFailureError",
    "DegenerateParametersError",
    "Grid",
    "InsufficientDataError",
    "IntegratorConfig",
    "InvalidArgumentError",
    "NumericalBlowupError",
    "NumericalFailureError",
    "StabilizedWeno",
    "SystemScheme",
    "UnsupportedOrderError",
    "UpwindPair",
    "UpwindSbpError",
    "WenoOperator",
    "advection_rhs",
    "apply_dmw",
    "assemble_dmws",
    "build_flux_grid",
    "build_grid",
    "build_upwind_pair",
    "dmw_matrix",
    "extract_lambdas",
    "fit_rate",
    "integrate",
    "modify_lambda",
    "nonlinear_weights",
    "rk4_step",
    "run_convergence",
    "run_four_shapes",
    "symmetric_split",
    "system_rhs",
    "system_stability_check",
    "verify_sbp",
]
