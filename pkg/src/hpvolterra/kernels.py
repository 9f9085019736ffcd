"""Kernel registry: K(t, s, u), its u-derivative and the inhomogeneous term.

Parameters are stored as decimal strings and converted on :meth:`bind`, so one
:class:`ProblemSpec` can be solved at several precisions without ever routing a
parameter through a double.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

from .exceptions import ConfigurationError
from .precision import PrecisionContext, context_for, scalar_exp


def _as_text(value) -> str:
    if isinstance(value, str):
        return value
    if hasattr(value, "_mpf_"):
        return context_for(value).to_str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel ``K(t, s, u)`` with its partial derivative in ``u``.

    ``func`` and ``func_du`` receive ``(t, s, u, p)`` where ``p`` maps parameter
    names to scalars of the caller's context.
    """

    name: str
    func: Callable
    func_du: Callable
    params: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", {k: _as_text(v) for k, v in self.params.items()})

    def bind(self, ctx: PrecisionContext):
        """Return ``(K, K_u)`` as plain ``(t, s, u)`` callables under ``ctx``."""
        p = {k: ctx.scalar(v) for k, v in self.params.items()}
        func, func_du = self.func, self.func_du
        return (lambda t, s, u: func(t, s, u, p)), (lambda t, s, u: func_du(t, s, u, p))

    def eval(self, t, s, u):
        ctx = context_for(u)
        p = {k: ctx.scalar(v) for k, v in self.params.items()}
        return self.func(t, s, u, p)

    def eval_du(self, t, s, u):
        ctx = context_for(u)
        p = {k: ctx.scalar(v) for k, v in self.params.items()}
        return self.func_du(t, s, u, p)


class BoundProblem(NamedTuple):
    K: Callable
    K_u: Callable
    g: Callable
    exact: Callable | None
    t_end: object


@dataclass(frozen=True)
class ProblemSpec:
    """``u(t) = g(t) + int_0^t K(t, s, u(s)) ds`` on ``[0, t_end]``.

    ``inhomogeneous`` and the optional analytic ``exact`` solution take
    ``(t, p)``, with ``p`` the merged kernel and problem parameters.
    """

    kernel: KernelSpec
    inhomogeneous: Callable
    t_end: str = "2"
    params: Mapping[str, str] = field(default_factory=dict)
    exact: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "params", {k: _as_text(v) for k, v in self.params.items()})
        object.__setattr__(self, "t_end", _as_text(self.t_end))
        ctx = PrecisionContext()
        if not ctx.scalar(self.t_end) > 0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")

    @property
    def name(self) -> str:
        return self.kernel.name

    def all_params(self) -> dict:
        return {**self.kernel.params, **self.params}

    def bind(self, ctx: PrecisionContext) -> BoundProblem:
        K, K_u = self.kernel.bind(ctx)
        p = {k: ctx.scalar(v) for k, v in self.all_params().items()}
        g, exact = self.inhomogeneous, self.exact
        return BoundProblem(
            K=K,
            K_u=K_u,
            g=lambda t: g(t, p),
            exact=(lambda t: exact(t, p)) if exact is not None else None,
            t_end=ctx.scalar(self.t_end),
        )


def _bratu_k(t, s, u, p):
    return -p["lambda"] * (t - s) * scalar_exp(u)


def _affine(t, p):
    return p["u0"] + p["uprime0"] * t


def _bratu_exact_zero_ic(t, p):
    lam = p["lambda"]
    mp = t.context
    if lam > 0:
        return -2 * mp.log(mp.cosh(t * mp.sqrt(lam / 2)))
    # lam < 0: u'' = |lam| e^u, blows up where the cosine argument reaches pi/2
    return -2 * mp.log(mp.cos(t * mp.sqrt(-lam / 2)))


def bratu_kernel(lam="1", u0="0", uprime0="0", t_end="1") -> ProblemSpec:
    """Initial-value Bratu problem ``u'' + lam*e^u = 0`` in Volterra form.

    ``u(x) = u0 + uprime0*x - lam * int_0^x (x - s) e^{u(s)} ds``.  The analytic
    solution is attached when it is known in closed form: ``lam == 0``, or
    ``u0 == uprime0 == 0`` (``-2 ln cosh(x sqrt(lam/2))`` for ``lam > 0``).
    """
    kernel = KernelSpec("bratu", _bratu_k, _bratu_k, {"lambda": lam})
    params = {"u0": _as_text(u0), "uprime0": _as_text(uprime0)}
    ctx = PrecisionContext()
    exact = None
    if ctx.scalar(kernel.params["lambda"]) == 0:
        exact = _affine
    elif ctx.scalar(params["u0"]) == 0 and ctx.scalar(params["uprime0"]) == 0:
        exact = _bratu_exact_zero_ic
    return ProblemSpec(kernel, _affine, t_end, params, exact)


def linear_kernel(a="1", b="1", t_end="2") -> ProblemSpec:
    """``K(t, s, u) = a*u`` with constant ``g = b``; exact solution ``b*e^{a t}``."""
    kernel = KernelSpec(
        "linear",
        lambda t, s, u, p: p["a"] * u,
        lambda t, s, u, p: p["a"],
        {"a": a},
    )
    return ProblemSpec(
        kernel,
        lambda t, p: p["b"],
        t_end,
        {"b": b},
        exact=lambda t, p: p["b"] * t.context.exp(p["a"] * t),
    )


KERNELS: dict[str, Callable[..., ProblemSpec]] = {
    "bratu": bratu_kernel,
    "linear": linear_kernel,
}


def register_kernel(name: str, factory: Callable[..., ProblemSpec]) -> None:
    if name in KERNELS:
        raise ConfigurationError(f"kernel {name!r} already registered")
    KERNELS[name] = factory


def make_problem(name: str, **params) -> ProblemSpec:
    """Build a registered problem, e.g. ``make_problem("bratu", lam="2")``."""
    try:
        factory = KERNELS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown kernel {name!r}; available: {', '.join(sorted(KERNELS))}"
        ) from None
    return factory(**params)


def derivative_mismatch(kernel: KernelSpec, t, s, u, ctx: PrecisionContext):
    """``|K_u - central difference of K|`` at one probe, with ``h = 10**(-digits/3)``."""
    K, K_u = kernel.bind(ctx)
    h = ctx.pow10(-(ctx.decimal_digits // 3))
    fd = (K(t, s, u + h) - K(t, s, u - h)) / (2 * h)
    return abs(K_u(t, s, u) - fd), h
