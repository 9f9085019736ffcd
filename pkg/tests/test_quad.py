import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpvolterra import AccuracyError, ConfigurationError, PrecisionContext, QuadratureRule
from hpvolterra import integrate, integrate_piecewise, uniform_grid
from hpvolterra.quad import gauss_legendre_nodes, integrate_many

ctx = PrecisionContext(50)
mp = ctx.mp
GL = QuadratureRule("gauss-legendre")
TS = QuadratureRule("tanh-sinh")
TOL = ctx.pow10(-45)


@pytest.mark.parametrize("rule", [GL, TS], ids=["gl", "ts"])
def test_basic_integrals(rule):
    assert abs(integrate(lambda s: mp.one, 0, 2, rule, ctx) - 2) <= TOL
    assert abs(integrate(lambda s: s, 0, 2, rule, ctx) - 2) <= TOL
    assert abs(integrate(mp.exp, 0, 1, rule, ctx) - (mp.e - 1)) <= TOL
    assert integrate(mp.exp, 1, 1, rule, ctx) == 0


def test_reversed_interval_rejected():
    with pytest.raises(ConfigurationError):
        integrate(mp.exp, 1, 0, GL, ctx)


def test_gauss_legendre_nodes_are_exact_on_degree_2n_minus_1():
    xs, ws = gauss_legendre_nodes(16, ctx)
    assert abs(mp.fsum(ws) - 2) <= ctx.pow10(-50)
    for k in range(32):
        exact = mp.mpf(2) / (k + 1) if k % 2 == 0 else 0
        assert abs(mp.fdot(ws, [x**k for x in xs]) - exact) <= ctx.pow10(-48)


polynomials = st.lists(st.integers(-50, 50), min_size=1, max_size=32)


@settings(max_examples=40, deadline=None)
@given(polynomials)
def test_polynomial_exactness(coeffs):
    f = lambda s: mp.fsum(c * s**k for k, c in enumerate(coeffs))
    exact = mp.fsum(mp.mpf(c) * 2 ** (k + 1) / (k + 1) for k, c in enumerate(coeffs))
    got = integrate(f, 0, 2, GL, ctx)
    assert abs(got - exact) <= TOL * (1 + abs(exact))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 199))
def test_additivity(k):
    c = ctx.scalar(k) / 100
    f = lambda s: mp.sin(3 * s) * mp.exp(-s)
    whole = integrate(f, 0, 2, GL, ctx)
    parts = integrate(f, 0, c, GL, ctx) + integrate(f, c, 2, GL, ctx)
    assert abs(whole - parts) <= TOL


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.integers(0, 9))
def test_positivity(a, b):
    f = lambda s: a * s * s + b + mp.exp(-s)
    assert integrate(f, 0, 2, GL, ctx) > 0


@pytest.mark.parametrize("f", [mp.exp, lambda s: mp.cos(7 * s), lambda s: 1 / (1 + s * s)])
def test_rules_agree_and_match_mpmath(f):
    gl = integrate(f, 0, 2, GL, ctx)
    ts = integrate(f, 0, 2, TS, ctx)
    with mpmath.workdps(70):
        ref = mpmath.quad(lambda s: f(ctx.scalar(s)), [0, 2])
    assert abs(gl - ts) <= TOL
    assert abs(gl - ref) <= TOL


def test_tanh_sinh_handles_endpoint_singularity():
    # int_0^1 ln(s) ds = -1; GL would stall at its refinement limit
    assert abs(integrate(mp.log, 0, 1, TS, ctx) + 1) <= TOL


def test_accuracy_error_reports_estimate():
    rule = QuadratureRule("gauss-legendre", max_refinement_level=2)
    with pytest.raises(AccuracyError) as info:
        integrate(mp.sqrt, 0, 1, rule, ctx)
    assert abs(info.value.estimate - mp.mpf(2) / 3) < ctx.pow10(-3)
    assert info.value.error_estimate > TOL


def test_integrate_many_components():
    a, b = integrate_many(lambda s: (s, s * s), 0, 3, GL, ctx)
    assert abs(a - mp.mpf(9) / 2) <= TOL and abs(b - 9) <= TOL


def test_piecewise():
    grid = uniform_grid("2", "0.1", ctx)
    assert abs(integrate_piecewise(lambda s: mp.one, grid, 10, GL) - 1) <= TOL
    assert integrate_piecewise(lambda s: mp.one, grid, 0, GL) == 0
    assert abs(integrate_piecewise(mp.exp, grid, 20, GL) - (mp.exp(2) - 1)) <= TOL


def test_rule_validation():
    with pytest.raises(ConfigurationError):
        QuadratureRule("simpson")
    with pytest.raises(ConfigurationError):
        QuadratureRule(target_digits=60).digits(ctx)
    assert QuadratureRule("tanh_sinh").kind == "tanh-sinh"


def test_piecewise_interpolant_trapezoid_area():
    from hpvolterra import Grid, interp

    grid = Grid.from_values(["0", "1", "2"], ctx)
    values = [mp.zero, mp.one, mp.mpf(2)]
    assert abs(integrate_piecewise(lambda s: interp(s, grid, values), grid, 2, GL) - 2) <= TOL
