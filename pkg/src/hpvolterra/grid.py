"""Time grids and nodal solution vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Sequence

from .exceptions import ConfigurationError, ShapeError
from .precision import PrecisionContext


@dataclass(frozen=True)
class Grid:
    """Strictly increasing nodes ``0 = t_0 < ... < t_N``.

    ``source`` remembers the ``(t_end, step)`` decimals of a uniform grid so it
    can be rebuilt exactly at another precision (see :meth:`at`).
    """

    nodes: tuple
    ctx: PrecisionContext
    source: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 2:
            raise ConfigurationError("a grid needs at least 2 nodes")
        if nodes[0] != 0:
            raise ConfigurationError(f"first node must be 0, got {nodes[0]}")
        for k in range(len(nodes) - 1):
            if not nodes[k] < nodes[k + 1]:
                raise ConfigurationError(f"nodes not strictly increasing at index {k + 1}")

    @classmethod
    def from_values(cls, values: Sequence, ctx: PrecisionContext) -> "Grid":
        return cls(tuple(ctx.scalar(v) for v in values), ctx)

    def __len__(self):
        return len(self.nodes)

    @property
    def n_segments(self) -> int:
        return len(self.nodes) - 1

    @property
    def t_end(self):
        return self.nodes[-1]

    def at(self, ctx: PrecisionContext) -> "Grid":
        """The same grid expressed in another precision context."""
        if ctx == self.ctx:
            return self
        if self.source is not None:
            return uniform_grid(*self.source, ctx=ctx)
        return Grid(tuple(ctx.round(ctx.scalar(t)) for t in self.nodes), ctx)


@dataclass(frozen=True)
class SolutionVector:
    grid: Grid
    values: tuple

    def __post_init__(self):
        values = tuple(self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.grid.nodes):
            raise ShapeError(
                f"{len(values)} values for a grid of {len(self.grid.nodes)} nodes"
            )

    @classmethod
    def constant(cls, grid: Grid, value) -> "SolutionVector":
        v = grid.ctx.scalar(value)
        return cls(grid, (v,) * len(grid.nodes))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "SolutionVector":
        return cls(grid, tuple(func(t) for t in grid.nodes))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)


def uniform_grid(t_end, step, ctx: PrecisionContext | None = None) -> Grid:
    """Uniform grid ``{0, step, 2*step, ..., t_end}``.

    The last node is ``t_end`` itself, not an accumulated sum; interior node ``k``
    is the decimal ``k * step`` rounded once.

    Raises
    ------
    ConfigurationError
        If ``t_end / step`` is not within ``1e-10`` of an integer.
    """
    ctx = ctx or PrecisionContext()
    mp = ctx.mp
    t = ctx.scalar(t_end)
    h = ctx.scalar(step)
    if not t > 0 or not h > 0:
        raise ConfigurationError(f"t_end and step must be positive, got {t_end}, {step}")
    ratio = t / h
    n = int(mp.nint(ratio))
    if n < 1 or abs(ratio - n) > mp.mpf("1e-10"):
        raise ConfigurationError(
            f"t_end={ctx.to_str(t)} is not an integer multiple of step={ctx.to_str(h)}"
        )
    source = (t_end if isinstance(t_end, str) else ctx.to_str(t),
              step if isinstance(step, str) else ctx.to_str(h))
    # k*step in exact decimal arithmetic; 19 * 0.1 must parse as 1.9, not 19 roundings of 0.1
    with localcontext() as dec:
        dec.prec = ctx.decimal_digits + 40
        step_dec = Decimal(source[1].strip())
        nodes = [ctx.scalar(str(step_dec * k)) for k in range(n)] + [t]
    return Grid(tuple(nodes), ctx, source=source)


def sup_norm_diff(a: SolutionVector, b: SolutionVector):
    """``max_i |a_i - b_i|``; the vectors must live on the same grid."""
    if a.grid is not b.grid and a.grid.nodes != b.grid.nodes:
        raise ShapeError("solution vectors are defined on different grids")
    mp = a.grid.ctx.mp
    return max((abs(x - y) for x, y in zip(a.values, b.values)), default=mp.zero)
