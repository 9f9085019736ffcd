"""Command-line interface.

Usage::

    hpvolterra solve --kernel linear --a 1 --b 1 --t-end 2 --step 0.1
    hpvolterra sweep --lambdas 0.5,1,2 --t-end 1 --step 0.05
    hpvolterra compare-precision --kernel linear --digit-levels 15,50,80

Exit codes: 0 converged, 2 ran but did not converge, 1 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .diagnostics import estimate_rate, precision_ladder
from .exceptions import AccuracyError, DiagnosticsError, SingularMatrixError, VolterraError
from .grid import uniform_grid
from .kernels import KERNELS, make_problem
from .precision import PrecisionContext
from .quad import QuadratureRule
from .solver import SolveResult, SolverConfig, solve
from .validation import check_digit_levels

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

DEFAULT_SWEEP_LAMBDAS = "0.5,1.0,2.0,3.0"

_KERNEL_FLAGS = {
    "bratu": {"lam": "lambda", "u0": "u0", "uprime0": "uprime0"},
    "linear": {"a": "a", "b": "b"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, kernel_choice: bool = True) -> None:
    if kernel_choice:
        p.add_argument("--kernel", choices=sorted(KERNELS), default="bratu")
    p.add_argument("--lambda", dest="lam", metavar="LAMBDA")
    p.add_argument("--u0")
    p.add_argument("--uprime0")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--t-end", default="2")
    p.add_argument("--step", default="0.1")
    p.add_argument("--precision", type=int, default=50, help="decimal digits")
    p.add_argument("--tol", help="sup-norm stopping threshold (decimal)")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--scheme", choices=["newton", "picard"], default="newton")
    p.add_argument("--quadrature", choices=["gauss-legendre", "tanh-sinh"],
                   default="gauss-legendre")
    p.add_argument("--config", metavar="FILE", help="'key = value' defaults")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hpvolterra", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    parser.commands = sub.choices

    p = sub.add_parser("solve", help="solve one problem")
    _common(p)
    p.add_argument("--out", default="solution.csv", metavar="FILE")
    p.add_argument("--trace", default="trace.csv", metavar="FILE")

    p = sub.add_parser("sweep", help="Bratu solves over several lambda values")
    _common(p, kernel_choice=False)
    p.add_argument("--lambdas", default=DEFAULT_SWEEP_LAMBDAS)
    p.add_argument("--trace-pattern", default="trace_lambda_{value}.csv")
    p.add_argument("--summary", default="sweep_summary.csv", metavar="FILE")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("compare-precision", help="solve at several precisions")
    _common(p)
    p.add_argument("--digit-levels", required=False)
    p.add_argument("--out", default="precision_ladder.csv", metavar="FILE")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip().lstrip("-").replace("-", "_")
            values["lam" if key == "lambda" else key] = value.strip()
    return values


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            defaults = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        known = vars(args)
        unknown = sorted(set(defaults) - set(known))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        subparser = parser.commands[args.command]
        for action in subparser._actions:
            if action.dest in defaults and action.type is not None:
                try:
                    defaults[action.dest] = action.type(defaults[action.dest])
                except ValueError:
                    raise UsageError(
                        f"bad value for {action.dest}: {defaults[action.dest]!r}"
                    ) from None
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _problem(args, kernel: str):
    flags = _KERNEL_FLAGS[kernel]
    for other, names in _KERNEL_FLAGS.items():
        if other == kernel:
            continue
        for dest, flag in names.items():
            if dest not in flags and getattr(args, dest, None) is not None:
                raise UsageError(f"--{flag} does not apply to the {kernel} kernel")
    params = {dest: getattr(args, dest) for dest in flags if getattr(args, dest) is not None}
    return make_problem(kernel, t_end=args.t_end, **params)


def _config(args) -> SolverConfig:
    return SolverConfig(
        scheme=args.scheme,
        tolerance=args.tol,
        max_iter=args.max_iter,
        precision=PrecisionContext(args.precision),
        rule=QuadratureRule(args.quadrature),
    )


def _write_csv(path, header, rows) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_solution(path, result: SolveResult) -> None:
    ctx = result.solution.grid.ctx
    _write_csv(path, ["t", "u"], (
        [ctx.to_str(t), ctx.to_str(u)]
        for t, u in zip(result.solution.grid.nodes, result.solution.values)
    ))


def write_trace(path, result: SolveResult, ctx: PrecisionContext | None = None) -> None:
    ctx = ctx or result.solution.grid.ctx
    _write_csv(path, ["iter", "successive_diff", "residual_norm", "wall_time_s"], (
        [r.iteration, ctx.to_str(r.successive_diff), ctx.to_str(r.residual_norm),
         f"{r.wall_time:.6f}"]
        for r in result.trace
    ))


def cmd_solve(args) -> int:
    problem = _problem(args, args.kernel)
    cfg = _config(args)
    grid = uniform_grid(args.t_end, args.step, cfg.precision)
    try:
        result = solve(problem, grid, None, cfg)
    except (AccuracyError, SingularMatrixError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        if exc.trace is not None:
            write_trace(args.trace, SolveResult(None, exc.trace, False, len(exc.trace)), cfg.precision)
        return EXIT_NOT_CONVERGED
    write_solution(args.out, result)
    write_trace(args.trace, result)
    status = "converged" if result.converged else ("diverged" if result.diverged else "not converged")
    print(f"{status} after {result.iterations_used} iterations", file=sys.stderr)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def _split_list(text: str, what: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise UsageError(f"empty {what} list")
    return items


def cmd_sweep(args) -> int:
    if getattr(args, "a", None) is not None or getattr(args, "b", None) is not None:
        raise UsageError("sweep always uses the bratu kernel; --a/--b do not apply")
    if args.lam is not None:
        raise UsageError("use --lambdas with sweep")
    lambdas = _split_list(args.lambdas, "lambda")
    cfg = _config(args)
    grid = uniform_grid(args.t_end, args.step, cfg.precision)
    ctx = cfg.precision
    for lam in lambdas:
        ctx.scalar(lam)
    base = {k: getattr(args, k) for k in ("u0", "uprime0") if getattr(args, k) is not None}

    def run(lam):
        problem = make_problem("bratu", lam=lam, t_end=args.t_end, **base)
        try:
            return solve(problem, grid, None, cfg), None
        except (VolterraError, ArithmeticError) as exc:
            return getattr(exc, "trace", None), exc

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(run, lambdas))
    else:
        outcomes = [run(lam) for lam in lambdas]

    rows = []
    any_converged = False
    for lam, (result, exc) in zip(lambdas, outcomes):
        if exc is not None:
            logger.warning("lambda=%s failed: %s", lam, exc)
            if result is not None:
                write_trace(args.trace_pattern.format(value=lam),
                            SolveResult(None, result, False, len(result)), ctx)
            rows.append([lam, "false", len(result) if result is not None else 0, "", "", "error"])
            continue
        write_trace(args.trace_pattern.format(value=lam), result)
        any_converged |= result.converged
        try:
            order = ctx.to_str(estimate_rate(result.trace).fitted_order)
        except DiagnosticsError:
            order = ""
        diffs = result.trace.successive_diffs
        rows.append([
            lam,
            "true" if result.converged else "false",
            result.iterations_used,
            ctx.to_str(diffs[-1]) if diffs else "",
            order,
            "true" if result.diverged else "false",
        ])
    _write_csv(args.summary,
               ["lambda", "converged", "iterations", "final_diff", "fitted_order", "diverged"],
               rows)
    return EXIT_OK if any_converged else EXIT_NOT_CONVERGED


def cmd_compare_precision(args) -> int:
    if not args.digit_levels:
        raise UsageError("--digit-levels is required")
    levels = check_digit_levels(_split_list(args.digit_levels, "digit level"))
    problem = _problem(args, args.kernel)
    cfg = _config(args)
    grid = uniform_grid(args.t_end, args.step, cfg.precision)
    ladder = precision_ladder(problem, grid, cfg, levels, max_workers=args.jobs)
    rows = []
    top = PrecisionContext(max(levels))
    for i, digits in enumerate(levels):
        result = ladder.results[i]
        dev = ladder.deviations[i] if i < len(ladder.deviations) else None
        rows.append([
            digits,
            "true" if result is not None and result.converged else "false",
            result.iterations_used if result is not None else 0,
            top.to_str(dev) if dev is not None else "",
        ])
    _write_csv(args.out, ["digits", "converged", "iterations", "deviation_from_next"], rows)
    ok = all(r is not None and r.converged for r in ladder.results)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


_COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "compare-precision": cmd_compare_precision}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VolterraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
