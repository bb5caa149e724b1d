"""Exact rational vectors, matrices, determinants and linear solving.

Every multiplicity in this package is the determinant of an integer matrix
and every fiber computation is an exact rational solve, so this module is
deliberately float-free.  Scalars are stdlib fractions (always in lowest
terms, positive denominator).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

Rational = Fraction


class Matrix:
    """Dense row-major matrix with Fraction entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries):
        entries = tuple(Fraction(e) for e in entries)
        if len(entries) != rows * cols:
            raise ValueError(
                f"entry count {len(entries)} != {rows}x{cols}"
            )
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def from_rows(cls, row_lists) -> "Matrix":
        row_lists = [list(r) for r in row_lists]
        nrows = len(row_lists)
        ncols = len(row_lists[0]) if row_lists else 0
        if any(len(r) != ncols for r in row_lists):
            raise ValueError("ragged rows")
        flat = [e for r in row_lists for e in r]
        return cls(nrows, ncols, flat)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, [Fraction(int(i == j)) for i in range(n) for j in range(n)])

    def at(self, i: int, j: int) -> Fraction:
        return self.entries[i * self.cols + j]

    def row(self, i: int):
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int):
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def row_lists(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def is_square(self) -> bool:
        return self.rows == self.cols

    def mul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            r = self.row(i)
            for j in range(other.cols):
                out.append(sum(r[k] * other.at(k, j) for k in range(self.cols)))
        return Matrix(self.rows, other.cols, out)

    def mul_vector(self, vec):
        if len(vec) != self.cols:
            raise ValueError("shape mismatch")
        return tuple(
            sum(self.at(i, k) * vec[k] for k in range(self.cols))
            for i in range(self.rows)
        )

    def transpose(self) -> "Matrix":
        out = [self.at(i, j) for j in range(self.cols) for i in range(self.rows)]
        return Matrix(self.cols, self.rows, out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self) -> str:
        body = "; ".join(
            " ".join(str(e) for e in self.row(i)) for i in range(self.rows)
        )
        return f"Matrix({self.rows}x{self.cols}: {body})"


def _integer_rows(m: Matrix):
    """Scale each row to integers, returning (int rows, product of scales)."""
    scaled = []
    scale = Fraction(1)
    for i in range(m.rows):
        row = m.row(i)
        mult = lcm(*(e.denominator for e in row)) if row else 1
        scaled.append([int(e * mult) for e in row])
        scale *= mult
    return scaled, scale


def det(m: Matrix) -> Fraction:
    """Exact determinant via fraction-free Bareiss elimination."""
    if not m.is_square():
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return Fraction(1)
    a, scale = _integer_rows(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return Fraction(0)
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (akk * row_i[j] - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = akk
    return Fraction(sign * a[n - 1][n - 1], 1) / scale


class SolveResult:
    """Outcome of an exact linear solve: unique / inconsistent / underdetermined."""

    __slots__ = ("status", "solution")

    UNIQUE = "unique"
    INCONSISTENT = "inconsistent"
    UNDERDETERMINED = "underdetermined"

    def __init__(self, status: str, solution=None):
        self.status = status
        self.solution = solution

    @property
    def is_unique(self) -> bool:
        return self.status == SolveResult.UNIQUE

    def __repr__(self) -> str:
        return f"SolveResult({self.status}, {self.solution})"


def solve(m: Matrix, rhs) -> SolveResult:
    """Solve m·x = rhs exactly and classify the system.

    UNIQUE requires full column rank and consistency; no tolerances anywhere.
    """
    if len(rhs) != m.rows:
        raise ValueError("rhs length != rows")
    aug = [list(m.row(i)) + [Fraction(rhs[i])] for i in range(m.rows)]
    nrows, ncols = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][c]
        aug[r] = [e / pv for e in aug[r]]
        for i in range(nrows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if aug[i][ncols] != 0:
            return SolveResult(SolveResult.INCONSISTENT)
    if len(pivots) < ncols:
        return SolveResult(SolveResult.UNDERDETERMINED)
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = aug[i][ncols]
    return SolveResult(SolveResult.UNIQUE, tuple(x))
