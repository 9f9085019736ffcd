"""Successive-approximation and Newton-Kantorovich solvers.

Both schemes discretize ``u(t) = g(t) + int_0^t K(t, s, u(s)) ds`` by nodal
values on a grid, with ``u`` between nodes given by linear interpolation.  All
integrals are split at grid nodes, where the interpolant has kinks.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from .exceptions import (
    AccuracyError,
    ConfigurationError,
    PrecisionOverflowError,
    SingularMatrixError,
)
from .grid import Grid, SolutionVector
from .kernels import BoundProblem, ProblemSpec
from .linalg import DenseMatrix, solve_linear
from .precision import PrecisionContext
from .quad import QuadratureRule, integrate_many

logger = logging.getLogger(__name__)

SCHEMES = ("newton", "picard")


@dataclass(frozen=True)
class SolverConfig:
    """Iteration settings.

    ``tolerance`` is kept as decimal text so the same config can be re-used at
    another precision; ``None`` picks ``10**-(2*target_digits//3)``.
    """

    scheme: str = "newton"
    tolerance: str | None = None
    max_iter: int = 50
    precision: PrecisionContext = field(default_factory=PrecisionContext)
    rule: QuadratureRule = field(default_factory=QuadratureRule)
    divergence_factor: int = 10
    divergence_window: int = 3

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, int) or self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be a positive int, got {self.max_iter!r}")
        if self.tolerance is not None and not isinstance(self.tolerance, str):
            tol = self.tolerance
            text = self.precision.to_str(tol) if hasattr(tol, "_mpf_") else (
                repr(tol) if isinstance(tol, float) else str(tol))
            object.__setattr__(self, "tolerance", text)
        tol = self.tol
        if not tol > 0:
            raise ConfigurationError("tolerance must be positive")
        floor = self.precision.pow10(-self.target_digits + 2)
        if tol < floor:
            raise ConfigurationError(
                f"tolerance {self.tolerance} is below the quadrature noise floor "
                f"1e-{self.target_digits - 2} at {self.precision.decimal_digits} digits"
            )

    @property
    def target_digits(self) -> int:
        return self.rule.digits(self.precision)

    @property
    def tol(self):
        if self.tolerance is None:
            return self.precision.pow10(-(2 * self.target_digits // 3))
        return self.precision.scalar(self.tolerance)

    @property
    def quadrature_tolerance(self):
        return self.rule.tolerance(self.precision)

    def with_precision(self, digits: int, tolerance: str | None = None) -> "SolverConfig":
        return replace(self, precision=PrecisionContext(digits),
                       tolerance=self.tolerance if tolerance is None else tolerance)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    successive_diff: object
    residual_norm: object
    wall_time: float
    oracle_error: object = None


@dataclass
class IterationTrace:
    """Per-iteration history of one solve."""

    records: list = field(default_factory=list)
    target_digits: int = 45

    def append(self, record: IterationRecord) -> None:
        if record.iteration != len(self.records):
            raise ValueError(
                f"record {record.iteration} appended after {len(self.records)} records"
            )
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def __iter__(self):
        return iter(self.records)

    @property
    def successive_diffs(self) -> list:
        return [r.successive_diff for r in self.records]

    @property
    def residual_norms(self) -> list:
        return [r.residual_norm for r in self.records]

    @property
    def oracle_errors(self) -> list:
        return [r.oracle_error for r in self.records]

    @classmethod
    def from_diffs(cls, diffs: Sequence, target_digits: int = 45) -> "IterationTrace":
        """Synthetic trace holding only successive differences."""
        trace = cls(target_digits=target_digits)
        for k, d in enumerate(diffs):
            trace.append(IterationRecord(k, d, None, 0.0))
        return trace


@dataclass
class SolveResult:
    solution: SolutionVector
    trace: IterationTrace
    converged: bool
    iterations_used: int
    scheme: str = "newton"
    diverged: bool = False
    failure: Exception | None = None


def _segment_ctx(grid: Grid, u: Sequence, k: int):
    t0, t1 = grid.nodes[k], grid.nodes[k + 1]
    h = t1 - t0
    return t0, t1, h, u[k], (u[k + 1] - u[k]) / h


def _integral_terms(bound: BoundProblem, grid: Grid, u: Sequence, rule) -> list:
    """``[int_0^{t_i} K(t_i, s, u~(s)) ds for each node i]`` with ``u~`` the interpolant."""
    ctx = grid.ctx
    K = bound.K
    n = len(grid.nodes)
    out = [ctx.mp.zero] * n
    segments = [_segment_ctx(grid, u, k) for k in range(n - 1)]
    for i in range(1, n):
        ti = grid.nodes[i]
        total = ctx.mp.zero
        for k in range(i):
            t0, t1, _, u0, slope = segments[k]

            def f(s, ti=ti, t0=t0, u0=u0, slope=slope):
                return K(ti, s, u0 + slope * (s - t0))

            total += integrate_many(f, t0, t1, rule, ctx)[0]
        out[i] = ctx.round(total)
    return out


def _as_vector(grid: Grid, u) -> tuple:
    values = u.values if isinstance(u, SolutionVector) else tuple(u)
    if isinstance(u, SolutionVector) and u.grid.ctx != grid.ctx:
        values = tuple(grid.ctx.scalar(v) for v in values)
    return tuple(values)


def _check_grid(bound: BoundProblem, grid: Grid) -> None:
    slack = grid.ctx.pow10(-grid.ctx.decimal_digits + 5)
    if grid.t_end > bound.t_end + slack:
        raise ConfigurationError(
            f"grid ends at {grid.t_end} beyond the problem horizon {bound.t_end}"
        )


def residual(problem: ProblemSpec, grid: Grid, u, rule: QuadratureRule | None = None) -> SolutionVector:
    """Nodal values of ``F(u)(t_i) = u_i - g(t_i) - int_0^{t_i} K(t_i, s, u~(s)) ds``."""
    ctx = grid.ctx
    bound = problem.bind(ctx)
    _check_grid(bound, grid)
    values = _as_vector(grid, u)
    integrals = _integral_terms(bound, grid, values, rule or QuadratureRule())
    return SolutionVector(
        grid,
        tuple(ctx.round(v - bound.g(t) - I) for v, t, I in zip(values, grid.nodes, integrals)),
    )


def _frechet(bound: BoundProblem, grid: Grid, u: Sequence, rule) -> DenseMatrix:
    ctx = grid.ctx
    mp = ctx.mp
    n = len(grid.nodes)
    K_u = bound.K_u
    A = DenseMatrix.identity(n, ctx)
    segments = [_segment_ctx(grid, u, k) for k in range(n - 1)]
    for i in range(1, n):
        ti = grid.nodes[i]
        for k in range(i):
            t0, t1, h, u0, slope = segments[k]

            # basis functions phi_k and phi_{k+1} are the only ones alive on [t_k, t_{k+1}]
            def f(s, ti=ti, t0=t0, t1=t1, h=h, u0=u0, slope=slope):
                d = K_u(ti, s, u0 + slope * (s - t0)) / h
                return d * (t1 - s), d * (s - t0)

            left, right = integrate_many(f, t0, t1, rule, ctx)
            A[i, k] -= left
            A[i, k + 1] -= right
    A.entries = [ctx.round(v) if v != 0 else mp.zero for v in A.entries]
    return A


def assemble_frechet_matrix(
    problem: ProblemSpec, grid: Grid, u, rule: QuadratureRule | None = None
) -> DenseMatrix:
    """Discretized Frechet derivative of the residual map at ``u``.

    ``A[i][j] = delta_ij - int_0^{t_i} K_u(t_i, s, u~(s)) phi_j(s) ds``.
    """
    bound = problem.bind(grid.ctx)
    _check_grid(bound, grid)
    return _frechet(bound, grid, _as_vector(grid, u), rule or QuadratureRule())


def _prepare(problem, grid, u0, cfg, scheme):
    if cfg.scheme != scheme:
        raise ConfigurationError(f"config selects scheme {cfg.scheme!r}, not {scheme!r}")
    ctx = cfg.precision
    grid = grid.at(ctx)
    bound = problem.bind(ctx)
    _check_grid(bound, grid)
    if u0 is None:
        g0 = ctx.round(bound.g(grid.nodes[0]))
        values = (g0,) * len(grid.nodes)
    else:
        values = tuple(ctx.round(ctx.scalar(v)) for v in _as_vector(grid, u0))
        if len(values) != len(grid.nodes):
            raise ConfigurationError(
                f"initial guess has {len(values)} values for {len(grid.nodes)} nodes"
            )
    oracle = None
    if bound.exact is not None:
        try:
            oracle = [bound.exact(t) for t in grid.nodes]
            if any(not ctx.mp.isfinite(v) or ctx.mp.im(v) != 0 for v in oracle):
                oracle = None
        except (ValueError, ArithmeticError):
            oracle = None
    return ctx, grid, bound, values, oracle


def _diverging(diffs: list, cfg: SolverConfig) -> bool:
    w = cfg.divergence_window
    if len(diffs) <= w:
        return False
    window = diffs[-w - 1 :]
    rising = all(a < b for a, b in zip(window, window[1:]))
    return rising and window[-1] >= cfg.divergence_factor * window[0]


def _oracle_error(values, oracle):
    if oracle is None:
        return None
    return max(abs(v - e) for v, e in zip(values, oracle))


def _run(problem, grid, u0, cfg, scheme, step) -> SolveResult:
    ctx, grid, bound, u, oracle = _prepare(problem, grid, u0, cfg, scheme)
    rule = cfg.rule
    tol = cfg.tol
    g = [ctx.round(bound.g(t)) for t in grid.nodes]
    trace = IterationTrace(target_digits=cfg.target_digits)
    mp = ctx.mp
    converged = diverged = False
    failure = None
    try:
        integrals = _integral_terms(bound, grid, u, rule)
        for k in range(cfg.max_iter):
            start = time.perf_counter()
            new_u = step(bound, grid, u, g, integrals, rule, ctx)
            diff = max(abs(a - b) for a, b in zip(new_u, u))
            try:
                new_integrals = _integral_terms(bound, grid, new_u, rule)
            except (AccuracyError, PrecisionOverflowError) as exc:
                # an iterate that jumped away cannot be integrated: that is divergence,
                # not a quadrature problem
                if not trace or diff < trace[-1].successive_diff:
                    raise
                trace.append(IterationRecord(k, ctx.round(diff), mp.inf,
                                             time.perf_counter() - start))
                diverged, failure = True, exc
                break
            res = max(abs(v - gi - I) for v, gi, I in zip(new_u, g, new_integrals))
            if not (mp.isfinite(diff) and mp.isfinite(res)):
                diverged = True
                break
            trace.append(IterationRecord(
                k, ctx.round(diff), ctx.round(res), time.perf_counter() - start,
                _oracle_error(new_u, oracle),
            ))
            u, integrals = new_u, new_integrals
            logger.debug("%s iteration %d: diff=%s residual=%s", scheme, k,
                         mp.nstr(diff, 5), mp.nstr(res, 5))
            if diff < tol:
                converged = True
                break
            if _diverging(trace.successive_diffs, cfg):
                diverged = True
                break
    except PrecisionOverflowError as exc:
        diverged, failure = True, exc
    except SingularMatrixError as exc:
        # a blown-up iterate makes ||A|| huge and trips the relative pivot guard
        diffs = trace.successive_diffs
        if len(diffs) < 2 or diffs[-1] < diffs[-2]:
            exc.iteration = len(trace)
            exc.trace = trace
            raise
        diverged, failure = True, exc
    except AccuracyError as exc:
        exc.trace = trace
        raise
    return SolveResult(
        solution=SolutionVector(grid, tuple(u)),
        trace=trace,
        converged=converged,
        iterations_used=len(trace),
        scheme=scheme,
        diverged=diverged,
        failure=failure,
    )


def _picard_step(bound, grid, u, g, integrals, rule, ctx):
    new_u = [ctx.round(gi + I) for gi, I in zip(g, integrals)]
    new_u[0] = g[0]
    return new_u


def _newton_step(bound, grid, u, g, integrals, rule, ctx):
    r = [v - gi - I for v, gi, I in zip(u, g, integrals)]
    A = _frechet(bound, grid, u, rule)
    delta = solve_linear(A, [-v for v in r], ctx)
    new_u = [ctx.round(v + d) for v, d in zip(u, delta)]
    new_u[0] = g[0]
    return new_u


def picard_solve(problem: ProblemSpec, grid: Grid, u0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Successive approximation ``u_i <- g(t_i) + int_0^{t_i} K(t_i, s, u~(s)) ds``.

    Stops when the sup-norm change between iterates drops below the tolerance
    or after ``max_iter`` sweeps; the last iterate is returned either way.
    """
    cfg = cfg or SolverConfig(scheme="picard")
    return _run(problem, grid, u0, cfg, "picard", _picard_step)


def newton_solve(problem: ProblemSpec, grid: Grid, u0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Newton-Kantorovich iteration ``A(u) delta = -F(u)``, ``u <- u + delta``.

    ``successive_diff`` in the trace is ``||delta||_inf``.  A singular Frechet
    matrix raises :class:`SingularMatrixError` with the iteration index set,
    unless the iterates were already growing; that case is reported as
    divergence with the error kept in ``failure``.
    """
    cfg = cfg or SolverConfig(scheme="newton")
    return _run(problem, grid, u0, cfg, "newton", _newton_step)


def solve(problem: ProblemSpec, grid: Grid, u0=None, cfg: SolverConfig | None = None) -> SolveResult:
    """Dispatch on ``cfg.scheme``."""
    cfg = cfg or SolverConfig()
    if cfg.scheme == "picard":
        return picard_solve(problem, grid, u0, cfg)
    return newton_solve(problem, grid, u0, cfg)
