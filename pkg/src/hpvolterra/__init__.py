"""Arbitrary-precision solvers for nonlinear Volterra integral equations."""

from .diagnostics import ConvergenceEstimate, convergence_report, estimate_rate, precision_ladder
from .estimator import VolterraSolver
from .exceptions import (
    AccuracyError,
    ConfigurationError,
    DiagnosticsError,
    ExtrapolationError,
    ParseError,
    ShapeError,
    SingularMatrixError,
    VolterraError,
)
from .grid import Grid, SolutionVector, sup_norm_diff, uniform_grid
from .interp import hat_function, interp
from .kernels import KernelSpec, ProblemSpec, bratu_kernel, linear_kernel, make_problem
from .linalg import DenseMatrix, solve_linear
from .precision import PrecisionContext, scalar_exp, scalar_from_decimal, to_decimal_string
from .quad import QuadratureRule, integrate, integrate_piecewise
from .solver import (
    IterationTrace,
    SolveResult,
    SolverConfig,
    assemble_frechet_matrix,
    newton_solve,
    picard_solve,
    residual,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceEstimate",
    "convergence_report",
    "estimate_rate",
    "precision_ladder",
    "VolterraSolver",
    "AccuracyError",
    "ConfigurationError",
    "DiagnosticsError",
    "ExtrapolationError",
    "ParseError",
    "ShapeError",
    "SingularMatrixError",
    "VolterraError",
    "Grid",
    "SolutionVector",
    "sup_norm_diff",
    "uniform_grid",
    "hat_function",
    "interp",
    "KernelSpec",
    "ProblemSpec",
    "bratu_kernel",
    "linear_kernel",
    "make_problem",
    "DenseMatrix",
    "solve_linear",
    "PrecisionContext",
    "scalar_exp",
    "scalar_from_decimal",
    "to_decimal_string",
    "QuadratureRule",
    "integrate",
    "integrate_piecewise",
    "IterationTrace",
    "SolveResult",
    "SolverConfig",
    "assemble_frechet_matrix",
    "newton_solve",
    "picard_solve",
    "residual",
    "solve",
]
