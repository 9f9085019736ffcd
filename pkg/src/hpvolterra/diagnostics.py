"""Empirical convergence-rate estimation and precision-ladder comparisons."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .exceptions import ConfigurationError, DiagnosticsError, VolterraError
from .grid import Grid, SolutionVector
from .kernels import ProblemSpec
from .precision import MIN_DIGITS, PrecisionContext
from .solver import IterationTrace, SolverConfig, solve

# Diffs below 10**(noise_digits - target_digits) are quadrature noise, not contraction.
NOISE_FLOOR_DIGITS = 3


@dataclass(frozen=True)
class ConvergenceEstimate:
    """Fit of ``e_{k+1} ~ C * e_k**p`` over iterations ``window[0]..window[1]``."""

    fitted_order: object
    fitted_constant: object
    window: tuple[int, int]
    quantity: str = "successive_diff"


def noise_floor(trace: IterationTrace, ctx: PrecisionContext | None = None):
    ctx = ctx or PrecisionContext(max(MIN_DIGITS, trace.target_digits + 5))
    return ctx.pow10(-trace.target_digits + NOISE_FLOOR_DIGITS)


def _usable_window(errors: list, floor) -> tuple[int, int] | None:
    """Longest run of strictly decreasing values above ``floor`` (latest wins ties)."""
    best = None
    start = None
    for k, e in enumerate(errors):
        if e is None or not e > floor:
            start = None
            continue
        if start is None or not e < errors[k - 1]:
            start = k
        if best is None or k - start >= best[1] - best[0]:
            best = (start, k)
    return best


def estimate_rate(
    trace: IterationTrace, quantity: str = "successive_diff", floor=None
) -> ConvergenceEstimate:
    """Least-squares fit of ``log e_{k+1} = log C + p log e_k``.

    Parameters
    ----------
    trace : IterationTrace
    quantity : {"successive_diff", "oracle_error"}
        Which error proxy to fit.
    floor : scalar, optional
        Override for the noise floor ``10**(3 - target_digits)``.

    Raises
    ------
    DiagnosticsError
        If fewer than 4 usable values lie above the noise floor.
    """
    if quantity not in ("successive_diff", "oracle_error"):
        raise ConfigurationError(f"unknown quantity {quantity!r}")
    ctx = PrecisionContext(max(MIN_DIGITS, trace.target_digits + 5))
    mp = ctx.mp
    floor = noise_floor(trace, ctx) if floor is None else ctx.scalar(floor)
    errors = [getattr(r, quantity) for r in trace]
    errors = [None if e is None else ctx.scalar(e) for e in errors]
    window = _usable_window(errors, floor)
    if window is None or window[1] - window[0] + 1 < 4:
        raise DiagnosticsError(
            f"need at least 4 decreasing {quantity} values above the noise floor "
            f"{mp.nstr(floor, 3)}; got window {window}"
        )
    lo, hi = window
    xs = [mp.log(errors[k]) for k in range(lo, hi)]
    ys = [mp.log(errors[k + 1]) for k in range(lo, hi)]
    n = len(xs)
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    sxx = mp.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise DiagnosticsError("degenerate window: all errors equal")
    sxy = mp.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    p = sxy / sxx
    log_c = my - p * mx
    return ConvergenceEstimate(p, mp.exp(log_c), window, quantity)


def convergence_report(trace: IterationTrace) -> dict:
    """Rate fits against successive differences and, when recorded, oracle errors."""
    report = {}
    try:
        report["successive_diff"] = estimate_rate(trace)
    except DiagnosticsError:
        report["successive_diff"] = None
    report["oracle_error"] = None
    oracle = [e for e in trace.oracle_errors if e is not None]
    if oracle:
        # true errors plateau at the discretization error; only fit above it
        floor = max(noise_floor(trace), 10 * min(oracle))
        try:
            report["oracle_error"] = estimate_rate(trace, "oracle_error", floor=floor)
        except DiagnosticsError:
            pass
    return report


@dataclass
class LadderResult:
    """Outcome of :func:`precision_ladder`.

    ``deviations[i]`` is the sup-norm distance between the solutions at
    ``digit_levels[i]`` and ``digit_levels[i + 1]`` (``None`` if either failed).
    """

    digit_levels: list
    results: list
    errors: list
    deviations: list = field(default_factory=list)

    def monotone(self) -> bool:
        """Deviations are nonincreasing across pairs of converged levels."""
        devs = [
            d for d, a, b in zip(self.deviations, self.results, self.results[1:])
            if d is not None and a.converged and b.converged
        ]
        return all(b <= a for a, b in zip(devs, devs[1:]))


def level_tolerance(cfg: SolverConfig, digits: int) -> str | None:
    """Tolerance used at a ladder level: the configured one, loosened to the
    level's noise floor when it would be unreachable there."""
    probe = cfg.with_precision(digits, tolerance="1")
    floor = probe.precision.pow10(-probe.target_digits + 2)
    if cfg.tolerance is None:
        return None
    tol = probe.precision.scalar(cfg.tolerance)
    return cfg.tolerance if tol >= floor else probe.precision.to_str(floor)


def precision_ladder(
    problem: ProblemSpec,
    grid: Grid,
    cfg: SolverConfig,
    digit_levels,
    u0=None,
    max_workers: int | None = None,
) -> LadderResult:
    """Solve the same problem at each precision in ``digit_levels``.

    Failures at one level are recorded in ``errors`` and do not stop the
    ladder.  Levels run on a thread pool when ``max_workers`` > 1.
    """
    levels = list(digit_levels)
    if len(levels) < 2:
        raise ConfigurationError("a precision ladder needs at least 2 digit levels")
    for d in levels:
        if isinstance(d, bool) or not isinstance(d, int) or d < MIN_DIGITS:
            raise ConfigurationError(f"digit level {d!r} is below the minimum {MIN_DIGITS}")

    def run(digits):
        level_cfg = cfg.with_precision(digits, tolerance=level_tolerance(cfg, digits))
        u_start = u0
        if isinstance(u0, SolutionVector):
            u_start = tuple(level_cfg.precision.scalar(v) for v in u0.values)
        return solve(problem, grid.at(level_cfg.precision), u_start, level_cfg)

    results: list = [None] * len(levels)
    errors: list = [None] * len(levels)

    def guarded(i):
        try:
            results[i] = run(levels[i])
        except (VolterraError, ArithmeticError) as exc:
            errors[i] = exc

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(guarded, range(len(levels))))
    else:
        for i in range(len(levels)):
            guarded(i)

    top = PrecisionContext(max(levels))
    deviations = []
    for a, b in zip(results, results[1:]):
        if a is None or b is None:
            deviations.append(None)
            continue
        deviations.append(top.round(max(
            abs(top.scalar(x) - top.scalar(y)) for x, y in zip(a.solution, b.solution)
        )))
    return LadderResult(levels, results, errors, deviations)
