"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError, ShapeError
from .grid import Grid
from .precision import MIN_DIGITS, PrecisionContext


def _flatten(X) -> list:
    if isinstance(X, (str, bytes)):
        raise ShapeError("expected a sequence of points, got a single string")
    arr = np.asarray(X, dtype=object)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise ShapeError(f"expected a 1-D array of points, got shape {arr.shape}")
    return list(arr)


def check_points(X, ctx: PrecisionContext) -> list:
    """Convert a 1-D (or single-column) array-like into scalars of ``ctx``."""
    return [ctx.scalar(x) for x in _flatten(X)]


def check_grid(X, ctx: PrecisionContext) -> Grid:
    """Turn ``X`` into a :class:`Grid` under ``ctx``.

    ``X`` may already be a grid, or an array-like of node values starting at 0
    and strictly increasing.
    """
    if isinstance(X, Grid):
        return X.at(ctx)
    nodes = check_points(X, ctx)
    if len(nodes) < 2:
        raise ConfigurationError("a grid needs at least 2 nodes")
    return Grid(tuple(nodes), ctx)


def check_digit_levels(levels) -> list[int]:
    out = []
    for d in levels:
        try:
            d = int(d)
        except (TypeError, ValueError):
            raise ConfigurationError(f"digit level {d!r} is not an integer") from None
        if d < MIN_DIGITS:
            raise ConfigurationError(f"digit level {d} is below the minimum {MIN_DIGITS}")
        out.append(d)
    if len(out) < 2:
        raise ConfigurationError("need at least 2 digit levels")
    return out
