"""Zero-energy critical points of parameter-dependent functionals via the
fibering map of the nonlinear generalized Rayleigh quotient."""

__version__ = "0.1.0"

from .core import (
    CriticalPointRecord,
    FiberDiagnostics,
    certify_zero_energy,
    fiber_eval,
    lambda_grad,
    lambda_value,
    membership_D,
    mu0,
    nehari_class,
    solve_t0,
)
from .eigen import eigenbasis, eigenpairs
from .functionals import Combination, GradientPower, PowerOf, WeightedPower, norm_functional
from .grid import Grid, build_grid, grid_from_dict
from .io import ResultBundle, load_field, persist_field, write_outputs
from .model import ModelSpec, Term
from .optimizer import MinMaxEstimate, SolveOptions, estimate_mu_n, mu_sequence, multistart, optimize_lambda
from .potential import PoissonEnergy, bopp_podolski_potential
from .power_classes import class_one_model, class_two_model, lambda_closed, t0_closed
from .problems import ProblemParams, build_problem
from .verification import CheckReport, bound_check, directional_fd_check, fiber_scan, invariant_suite

__all__ = [
    "CheckReport",
    "Combination",
    "CriticalPointRecord",
    "FiberDiagnostics",
    "GradientPower",
    "Grid",
    "MinMaxEstimate",
    "ModelSpec",
    "PoissonEnergy",
    "PowerOf",
    "ProblemParams",
    "ResultBundle",
    "SolveOptions",
    "Term",
    "WeightedPower",
    "bopp_podolski_potential",
    "bound_check",
    "build_grid",
    "build_problem",
    "certify_zero_energy",
    "class_one_model",
    "class_two_model",
    "directional_fd_check",
    "eigenbasis",
    "eigenpairs",
    "estimate_mu_n",
    "fiber_eval",
    "fiber_scan",
    "grid_from_dict",
    "invariant_suite",
    "lambda_closed",
    "lambda_grad",
    "lambda_value",
    "load_field",
    "membership_D",
    "mu0",
    "mu_sequence",
    "multistart",
    "nehari_class",
    "norm_functional",
    "optimize_lambda",
    "persist_field",
    "solve_t0",
    "t0_closed",
    "write_outputs",
]
