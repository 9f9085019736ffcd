"""Piecewise-linear interpolation on a :class:`~hpvolterra.grid.Grid`."""

from __future__ import annotations

from bisect import bisect_left

from .exceptions import ExtrapolationError, ShapeError
from .grid import Grid, SolutionVector

# Points this many user-precision ulps (in decimal digits) outside the grid are
# clamped; quadrature may probe the endpoints with rounding fuzz.
_CLAMP_SLACK_DIGITS = 5


def _locate(x, grid: Grid):
    """Return ``(j, exact)``: node index if ``x`` is a node, else left segment index."""
    nodes = grid.nodes
    slack = grid.ctx.pow10(-grid.ctx.decimal_digits + _CLAMP_SLACK_DIGITS)
    if x < nodes[0]:
        if nodes[0] - x <= slack:
            return 0, True
        raise ExtrapolationError(f"x={x} lies below the grid start {nodes[0]}")
    if x > nodes[-1]:
        if x - nodes[-1] <= slack:
            return len(nodes) - 1, True
        raise ExtrapolationError(f"x={x} lies beyond the grid end {nodes[-1]}")
    j = bisect_left(nodes, x)
    if nodes[j] == x:
        return j, True
    return j - 1, False


def interp(x, grid: Grid, values) -> object:
    """Linear interpolant of ``values`` at ``x``.

    Nodal points return the stored value unchanged.  Anything outside
    ``[t_0, t_N]`` (beyond a tiny rounding slack) raises
    :class:`ExtrapolationError`.
    """
    fp = values.values if isinstance(values, SolutionVector) else values
    if len(fp) != len(grid.nodes):
        raise ShapeError(f"{len(fp)} values for {len(grid.nodes)} nodes")
    i, exact = _locate(x, grid)
    if exact:
        return fp[i]
    xp = grid.nodes
    return fp[i] + (fp[i + 1] - fp[i]) * (x - xp[i]) / (xp[i + 1] - xp[i])


def hat_function(j: int, s, grid: Grid):
    """Nodal basis function ``phi_j(s)``: 1 at ``t_j``, 0 at every other node."""
    nodes = grid.nodes
    if not 0 <= j < len(nodes):
        raise ShapeError(f"node index {j} out of range 0..{len(nodes) - 1}")
    mp = grid.ctx.mp
    i, exact = _locate(s, grid)
    if exact:
        return mp.one if i == j else mp.zero
    if i == j:
        return (nodes[j + 1] - s) / (nodes[j + 1] - nodes[j])
    if i == j - 1:
        return (s - nodes[j - 1]) / (nodes[j] - nodes[j - 1])
    return mp.zero
