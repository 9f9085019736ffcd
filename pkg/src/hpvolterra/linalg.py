"""Dense arbitrary-precision linear algebra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exceptions import ShapeError, SingularMatrixError
from .precision import PrecisionContext, context_for


@dataclass
class DenseMatrix:
    """Row-major matrix of scalars."""

    rows: int
    cols: int
    entries: list

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeError("matrix dimensions must be positive")
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ctx: PrecisionContext | None = None):
        ctx = ctx or PrecisionContext()
        rows = [list(r) for r in rows]
        cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ShapeError("ragged rows")
        return cls(len(rows), cols, [ctx.scalar(x) for r in rows for x in r])

    @classmethod
    def identity(cls, n: int, ctx: PrecisionContext):
        mp = ctx.mp
        return cls(n, n, [mp.one if i == j else mp.zero for i in range(n) for j in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def __setitem__(self, ij, value):
        i, j = ij
        self.entries[i * self.cols + j] = value

    def row(self, i: int) -> list:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list]:
        return [self.row(i) for i in range(self.rows)]

    def matvec(self, x: Sequence) -> list:
        if len(x) != self.cols:
            raise ShapeError(f"vector of length {len(x)} for {self.cols} columns")
        return [sum((a * b for a, b in zip(self.row(i), x)), 0 * x[0]) for i in range(self.rows)]

    def norm_inf(self):
        return max(sum(abs(a) for a in self.row(i)) for i in range(self.rows))


def residual_norm(A: DenseMatrix, x: Sequence, rhs: Sequence):
    """``||A x - rhs||_inf``."""
    return max(abs(ax - b) for ax, b in zip(A.matvec(x), rhs))


def solve_linear(A: DenseMatrix, rhs: Sequence, ctx: PrecisionContext | None = None) -> list:
    """Solve ``A x = rhs`` by Gaussian elimination with partial pivoting.

    Works on copies at the context's working precision; the solution is rounded
    to the user precision.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below ``10**(5 - decimal_digits) * ||A||_inf``.
    """
    if A.rows != A.cols:
        raise ShapeError(f"matrix is {A.rows}x{A.cols}, not square")
    if len(rhs) != A.rows:
        raise ShapeError(f"rhs has length {len(rhs)}, expected {A.rows}")
    ctx = ctx or context_for(A.entries[0])
    n = A.rows
    conv = ctx.scalar
    a = [[conv(v) for v in A.row(i)] for i in range(n)]
    b = [conv(v) for v in rhs]
    guard = ctx.pow10(5 - ctx.decimal_digits) * A.norm_inf()

    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if abs(a[p][k]) <= guard:
            raise SingularMatrixError(
                f"pivot {a[p][k]} in column {k} is below the singularity threshold", column=k
            )
        if p != k:
            a[k], a[p] = a[p], a[k]
            b[k], b[p] = b[p], b[k]
        pivot_row = a[k]
        pivot = pivot_row[k]
        for i in range(k + 1, n):
            row = a[i]
            if row[k] == 0:
                continue
            m = row[k] / pivot
            row[k] = 0
            for j in range(k + 1, n):
                row[j] -= m * pivot_row[j]
            b[i] -= m * b[k]

    x = [None] * n
    for i in range(n - 1, -1, -1):
        row = a[i]
        acc = b[i]
        for j in range(i + 1, n):
            acc -= row[j] * x[j]
        x[i] = acc / row[i]
    return [ctx.round(v) for v in x]
