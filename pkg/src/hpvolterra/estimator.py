"""Scikit-learn style front end.

``VolterraSolver().fit(t_nodes)`` solves the configured problem on the grid
given by ``t_nodes``; ``predict(t)`` evaluates the piecewise-linear solution.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .interp import interp
from .kernels import ProblemSpec, make_problem
from .precision import PrecisionContext
from .quad import QuadratureRule
from .solver import SolverConfig, residual, solve
from .validation import check_grid, check_points


class VolterraSolver(BaseEstimator):
    """Solve ``u(t) = g(t) + int_0^t K(t, s, u(s)) ds`` on a user-supplied grid.

    Parameters
    ----------
    kernel : str or ProblemSpec, default="bratu"
        Registered kernel name, or a ready-made problem.
    kernel_params : dict, optional
        Keyword arguments for the kernel factory (e.g. ``{"lam": "2"}``).
        Values are best given as decimal strings.
    scheme : {"newton", "picard"}, default="newton"
    tol : str, optional
        Sup-norm stopping threshold; derived from the precision when omitted.
    max_iter : int, default=50
    precision : int, default=50
        Decimal digits of working precision.
    quadrature : {"gauss-legendre", "tanh-sinh"}, default="gauss-legendre"
    target_digits : int, optional
        Quadrature accuracy; ``precision - 5`` when omitted.
    initial_guess : scalar or sequence, optional
        Constant or nodal starting values; ``g(t_0)`` everywhere by default.

    Attributes
    ----------
    grid_ : Grid
    solution_ : SolutionVector
    trace_ : IterationTrace
    converged_ : bool
    diverged_ : bool
    n_iter_ : int
    problem_ : ProblemSpec
    """

    def __init__(
        self,
        kernel="bratu",
        kernel_params=None,
        scheme="newton",
        tol=None,
        max_iter=50,
        precision=50,
        quadrature="gauss-legendre",
        target_digits=None,
        initial_guess=None,
    ):
        self.kernel = kernel
        self.kernel_params = kernel_params
        self.scheme = scheme
        self.tol = tol
        self.max_iter = max_iter
        self.precision = precision
        self.quadrature = quadrature
        self.target_digits = target_digits
        self.initial_guess = initial_guess

    def _config(self) -> SolverConfig:
        return SolverConfig(
            scheme=self.scheme,
            tolerance=self.tol,
            max_iter=self.max_iter,
            precision=PrecisionContext(self.precision),
            rule=QuadratureRule(self.quadrature, self.target_digits),
        )

    def _problem(self, grid) -> ProblemSpec:
        if isinstance(self.kernel, ProblemSpec):
            return self.kernel
        params = dict(self.kernel_params or {})
        params.setdefault("t_end", grid.ctx.to_str(grid.t_end))
        return make_problem(self.kernel, **params)

    def fit(self, X, y=None):
        """Solve on the grid whose nodes are ``X``; ``y`` is ignored."""
        cfg = self._config()
        grid = check_grid(X, cfg.precision)
        problem = self._problem(grid)
        u0 = self.initial_guess
        if u0 is not None and np.ndim(u0) == 0:
            u0 = [u0] * len(grid)
        result = solve(problem, grid, u0, cfg)
        self.problem_ = problem
        self.grid_ = result.solution.grid
        self.solution_ = result.solution
        self.trace_ = result.trace
        self.converged_ = result.converged
        self.diverged_ = result.diverged
        self.n_iter_ = result.iterations_used
        self.config_ = cfg
        return self

    def predict(self, X) -> np.ndarray:
        """Interpolated solution at the points ``X`` (object array of scalars).

        Points outside the fitted grid raise ``ExtrapolationError``.
        """
        check_is_fitted(self, "solution_")
        points = check_points(X, self.config_.precision)
        return np.array([interp(x, self.grid_, self.solution_) for x in points], dtype=object)

    def residual_norm(self):
        """``||F(u)||_inf`` of the fitted solution."""
        check_is_fitted(self, "solution_")
        r = residual(self.problem_, self.grid_, self.solution_, self.config_.rule)
        return max(abs(v) for v in r.values)

    def score(self, X, y):
        """Negative sup-norm error of :meth:`predict` against reference values ``y``."""
        pred = self.predict(X)
        ref = check_points(y, self.config_.precision)
        return -max(abs(p - r) for p, r in zip(pred, ref))
