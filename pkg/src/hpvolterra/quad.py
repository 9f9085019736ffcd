"""High-precision quadrature over finite intervals.

Two rules are provided, both refined level by level with the error estimated
from the difference of the last two levels:

* ``"gauss-legendre"``: composite n-point Gauss-Legendre; level ``l`` splits the
  interval into ``2**l`` panels.
* ``"tanh-sinh"``: double-exponential substitution with step ``2**-l``; each
  level reuses the previous level's function values.

Nodes and weights are computed here (no library quadrature) and cached per
working precision.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable

from .exceptions import AccuracyError, ConfigurationError, ShapeError
from .precision import PrecisionContext, context_for

KINDS = ("gauss-legendre", "tanh-sinh")
_ALIASES = {"gauss-legendre-composite": "gauss-legendre", "gl": "gauss-legendre",
            "ts": "tanh-sinh", "tanh_sinh": "tanh-sinh"}


@dataclass(frozen=True)
class QuadratureRule:
    """Rule selection and accuracy target.

    Parameters
    ----------
    kind : {"gauss-legendre", "tanh-sinh"}
    target_digits : int, optional
        Requested relative accuracy ``10**-target_digits``; defaults to the
        context's ``decimal_digits - 5``.
    max_refinement_level : int, optional
        Last refinement level tried before giving up.
    points : int
        Points per panel for Gauss-Legendre.
    """

    kind: str = "gauss-legendre"
    target_digits: int | None = None
    max_refinement_level: int | None = None
    points: int = 16

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ConfigurationError(f"unknown quadrature kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.target_digits is not None and self.target_digits < 1:
            raise ConfigurationError("target_digits must be positive")
        if self.max_refinement_level is not None and self.max_refinement_level < 1:
            raise ConfigurationError("max_refinement_level must be positive")
        if self.points < 1:
            raise ConfigurationError("points must be positive")

    def digits(self, ctx: PrecisionContext) -> int:
        """Effective target digits under ``ctx``."""
        digits = self.target_digits if self.target_digits is not None else ctx.decimal_digits - 5
        if digits > ctx.decimal_digits:
            raise ConfigurationError(
                f"target_digits={digits} exceeds working precision {ctx.decimal_digits}"
            )
        return digits

    def max_level(self) -> int:
        if self.max_refinement_level is not None:
            return self.max_refinement_level
        return 8 if self.kind == "gauss-legendre" else 10

    def tolerance(self, ctx: PrecisionContext):
        return ctx.pow10(-self.digits(ctx))


_cache: dict = {}
_cache_lock = threading.Lock()


def _cached(key, build):
    try:
        return _cache[key]
    except KeyError:
        pass
    value = build()
    with _cache_lock:
        return _cache.setdefault(key, value)


def gauss_legendre_nodes(n: int, ctx: PrecisionContext):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    mp = ctx.mp
    return _cached(("gl", n, mp.prec), lambda: _gl_nodes(n, mp))


def _gl_nodes(n, mp):
    nodes, weights = [], []
    tol = mp.mpf(2) ** (-mp.prec + 4)
    for i in range(1, n // 2 + 1):
        x = mp.cos(mp.pi * (i - mp.mpf("0.25")) / (n + mp.mpf("0.5")))
        for _ in range(100):
            p0, p1 = mp.one, x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < tol:
                break
        p0, p1 = mp.one, x
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        w = 2 / ((1 - x * x) * dp * dp)
        nodes += [x, -x]
        weights += [w, w]
    if n % 2:
        p0, p1 = mp.one, mp.zero
        for k in range(2, n + 1):
            p0, p1 = p1, (-(k - 1) * p0) / k
        # P_n'(0) = n * P_{n-1}(0)
        dp = n * p0
        nodes.append(mp.zero)
        weights.append(2 / (dp * dp))
    return tuple(nodes), tuple(weights)


def tanh_sinh_level(level: int, ctx: PrecisionContext):
    """New abscissae of tanh-sinh level ``level`` on [-1, 1].

    Returns ``(h, [(c, w), ...])`` where each pair stands for the two points
    ``+-(1 - c)`` (``c`` is the distance to the endpoint, kept separately to
    avoid cancellation) and ``w`` is the unscaled weight.  The centre point is
    returned at level 0 as ``c = 1``.
    """
    mp = ctx.mp
    return _cached(("ts", level, mp.prec), lambda: _ts_level(level, mp))


def _ts_level(level, mp):
    h = mp.mpf(2) ** (-level)
    cutoff = mp.mpf(10) ** (-(mp.dps + 5))
    half_pi = mp.pi / 2
    points = []
    k = 0 if level == 0 else 1
    step = 1 if level == 0 else 2
    while True:
        t = k * h
        u = half_pi * mp.sinh(t)
        ch = mp.cosh(u)
        w = half_pi * mp.cosh(t) / (ch * ch)
        if w < cutoff:
            break
        # 1 - tanh(u) = 2 / (1 + exp(2u))
        c = 2 / (1 + mp.exp(2 * u))
        points.append((c, w, k == 0))
        k += step
    return h, points


def _as_tuple(value):
    return value if isinstance(value, tuple) else (value,)


def _converged(prev, curr, tol):
    err = max(abs(a - b) for a, b in zip(prev, curr))
    scale = 1 + max(abs(c) for c in curr)
    return err, err <= tol * scale


def _gauss_legendre(f, a, b, rule, ctx, tol):
    xs, ws = gauss_legendre_nodes(rule.points, ctx)
    mp = ctx.mp
    prev = None
    err = None
    for level in range(rule.max_level() + 1):
        panels = 2**level
        width = (b - a) / panels
        half = width / 2
        total = None
        for p in range(panels):
            mid = a + (2 * p + 1) * half
            cols = list(zip(*(_as_tuple(f(mid + half * x)) for x in xs)))
            acc = [mp.fdot(ws, col) for col in cols]
            total = acc if total is None else [s + v for s, v in zip(total, acc)]
        curr = tuple(half * v for v in total)
        if prev is not None:
            err, ok = _converged(prev, curr, tol)
            if ok:
                return curr
        prev = curr
    raise AccuracyError(
        f"gauss-legendre did not reach 1e-{rule.digits(ctx)} after level {rule.max_level()}",
        estimate=prev,
        error_estimate=err,
    )


def _tanh_sinh(f, a, b, rule, ctx, tol):
    half = (b - a) / 2
    acc = None
    prev = None
    err = None
    for level in range(rule.max_level() + 1):
        h, points = tanh_sinh_level(level, ctx)
        for c, w, centre in points:
            if centre:
                vals = [w * v for v in _as_tuple(f(a + half))]
            else:
                d = half * c
                fl = _as_tuple(f(a + d))
                fr = _as_tuple(f(b - d))
                vals = [w * (x + y) for x, y in zip(fl, fr)]
            acc = vals if acc is None else [s + v for s, v in zip(acc, vals)]
        curr = tuple(half * h * v for v in acc)
        if prev is not None:
            err, ok = _converged(prev, curr, tol)
            if ok:
                return curr
        prev = curr
    raise AccuracyError(
        f"tanh-sinh did not reach 1e-{rule.digits(ctx)} after level {rule.max_level()}",
        estimate=prev,
        error_estimate=err,
    )


def _integrate(f, lower, upper, rule, ctx):
    rule = rule or QuadratureRule()
    ctx = ctx or context_for(lower)
    mp = ctx.mp
    a, b = ctx.scalar(lower), ctx.scalar(upper)
    if a > b:
        raise ConfigurationError(f"lower={a} exceeds upper={b}")
    tol = rule.tolerance(ctx)
    if a == b:
        probe = _as_tuple(f(a))
        return tuple(mp.zero for _ in probe)
    impl = _gauss_legendre if rule.kind == "gauss-legendre" else _tanh_sinh
    try:
        result = impl(f, a, b, rule, ctx, tol)
    except AccuracyError as exc:
        if exc.estimate is not None:
            exc.estimate = tuple(ctx.round(v) for v in exc.estimate)
        raise
    return tuple(ctx.round(v) for v in result)


def integrate(
    f: Callable,
    lower,
    upper,
    rule: QuadratureRule | None = None,
    ctx: PrecisionContext | None = None,
):
    """Integral of ``f`` over ``[lower, upper]``.

    The estimated absolute error is at most ``10**-target_digits * (1 + |result|)``.

    Raises
    ------
    AccuracyError
        When the last refinement level is reached; ``exc.estimate`` holds the
        best value and ``exc.error_estimate`` its estimated error.
    """
    try:
        return _integrate(f, lower, upper, rule, ctx)[0]
    except AccuracyError as exc:
        if exc.estimate is not None:
            exc.estimate = exc.estimate[0]
        raise


def integrate_many(f: Callable, lower, upper, rule=None, ctx=None) -> tuple:
    """Like :func:`integrate` for an ``f`` returning a tuple; integrates each component."""
    return _integrate(f, lower, upper, rule, ctx)


def integrate_piecewise(f: Callable, grid, upper_node: int, rule=None):
    """Integral of ``f`` over ``[t_0, t_upper_node]``, split at the grid nodes."""
    if not 0 <= upper_node < len(grid.nodes):
        raise ShapeError(f"upper_node {upper_node} out of range")
    ctx = grid.ctx
    nodes = grid.nodes
    total = ctx.mp.zero
    for k in range(upper_node):
        total += integrate(f, nodes[k], nodes[k + 1], rule, ctx)
    return ctx.round(total)

