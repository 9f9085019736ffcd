import functools

import pytest

from hpvolterra import PrecisionContext, SolverConfig, make_problem, solve, uniform_grid

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def cached_solve(kernel, params, t_end, step, scheme="newton", digits=50, u0=None):
    """Memoized solve; ``params`` is a tuple of (name, value) pairs."""
    ctx = PrecisionContext(digits)
    grid = uniform_grid(t_end, step, ctx)
    problem = make_problem(kernel, t_end=t_end, **dict(params))
    guess = None if u0 is None else [u0] * len(grid)
    return solve(problem, grid, guess, SolverConfig(scheme=scheme, precision=ctx))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def solved():
    return cached_solve


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance criterion, shown in the summary."""

    def _report(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _report
