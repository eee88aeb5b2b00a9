"""Exact integer linear algebra: rank, determinant, minimal kernel vectors.

Everything here operates on arbitrary-precision Python integers through
fraction-free (Bareiss) elimination, so there is no floating point anywhere
in a decision path.  Exact ratios are represented by the standard library
``fractions.Fraction``, re-exported as :data:`Rational`.
"""

from __future__ import annotations

from fractions import Fraction as Rational
from math import gcd
from typing import Iterable, Optional, Sequence

from .errors import DimensionError

__all__ = [
    "Rational",
    "IntegerMatrix",
    "rank",
    "determinant",
    "minimal_kernel_vector",
]


class IntegerMatrix:
    """Dense matrix of exact integers, row-major.

    Rows index model parameters, columns index runs, following the
    transposed-model-matrix convention used throughout the package.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable[int]]):
        data = [list(row) for row in entries]
        if not data or not data[0]:
            raise DimensionError("matrix needs at least one row and one column")
        cols = len(data[0])
        for i, row in enumerate(data):
            if len(row) != cols:
                raise DimensionError(f"row {i} has {len(row)} entries, expected {cols}")
            for j, x in enumerate(row):
                if not isinstance(x, int):
                    raise DimensionError(f"entry ({i},{j}) is {type(x).__name__}, not int")
        self.rows = len(data)
        self.cols = cols
        self.entries = data

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "IntegerMatrix":
        return cls([[col[i] for col in columns] for i in range(len(columns[0]))])

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def column(self, j: int) -> list[int]:
        return [row[j] for row in self.entries]

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(row[j] for row in self.entries) for j in range(self.cols)]

    def select_columns(self, cols: Sequence[int]) -> "IntegerMatrix":
        return IntegerMatrix([[row[j] for j in cols] for row in self.entries])

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def mul_vector(self, u: Sequence[int]) -> list[int]:
        if len(u) != self.cols:
            raise DimensionError(f"vector length {len(u)} != {self.cols} columns")
        return [sum(a * b for a, b in zip(row, u)) for row in self.entries]

    def matmul(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.transpose().entries
        return IntegerMatrix([[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.entries])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, IntegerMatrix)
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(r) for r in self.entries)))

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.rows}x{self.cols})"

    def __str__(self) -> str:
        width = max((len(str(x)) for row in self.entries for x in row), default=1)
        return "\n".join(" ".join(str(x).rjust(width) for x in row) for row in self.entries)


def _bareiss(rows: list[list[int]]) -> tuple[int, int, int]:
    """Fraction-free elimination in place.

    Returns ``(rank, sign, last_pivot)`` where ``sign`` tracks row swaps and
    ``last_pivot`` is the pivot produced by the final elimination step (the
    determinant of the leading rank x rank submatrix up to row permutation).
    """
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    rk = 0
    prev = 1
    sign = 1
    lead = 1
    for col in range(ncols):
        piv = None
        for r in range(rk, m):
            if rows[r][col]:
                piv = r
                break
        if piv is None:
            continue
        if piv != rk:
            rows[rk], rows[piv] = rows[piv], rows[rk]
            sign = -sign
        lead = rows[rk][col]
        for r in range(rk + 1, m):
            f = rows[r][col]
            if f:
                row_r = rows[r]
                row_p = rows[rk]
                for c in range(col, ncols):
                    row_r[c] = (lead * row_r[c] - f * row_p[c]) // prev
            elif prev != 1 or lead != 1:
                row_r = rows[r]
                for c in range(col, ncols):
                    row_r[c] = (lead * row_r[c]) // prev
        prev = lead
        rk += 1
        if rk == m:
            break
    return rk, sign, lead


def rank(m: IntegerMatrix) -> int:
    """Rank over the rationals, by fraction-free elimination."""
    work = [list(row) for row in m.entries]
    rk, _, _ = _bareiss(work)
    return rk


def determinant(m: IntegerMatrix) -> int:
    """Exact integer determinant of a square matrix."""
    if m.rows != m.cols:
        raise DimensionError(f"determinant needs a square matrix, got {m.shape}")
    work = [list(row) for row in m.entries]
    rk, sign, lead = _bareiss(work)
    if rk < m.rows:
        return 0
    return sign * lead


def _normalize_primitive(vec: list[int]) -> list[int]:
    """Divide by the gcd of the entries and make the first nonzero entry positive."""
    g = 0
    for x in vec:
        g = gcd(g, x)
    if g > 1:
        vec = [x // g for x in vec]
    for x in vec:
        if x:
            if x < 0:
                vec = [-y for y in vec]
            break
    return vec


def minimal_kernel_vector(m: IntegerMatrix, columns: Iterable[int]) -> Optional[list[int]]:
    """Kernel vector supported exactly on a minimally dependent column set.

    If the columns indexed by ``columns`` are minimally dependent (the whole
    set is dependent, every proper subset independent), returns the
    integer vector ``u`` of length ``m.cols`` with ``m @ u = 0``, support
    equal to the given set, coprime entries, and first nonzero entry
    positive.  Returns ``None`` otherwise.
    """
    cols = sorted(set(columns))
    if not cols:
        raise ValueError("column set must be nonempty")
    if cols[0] < 0 or cols[-1] >= m.cols:
        raise ValueError(f"column index out of range 0..{m.cols - 1}")
    k = len(cols)
    pivots: list[tuple[int, list[int], list[int], int]] = []  # (pos, reduced, coeffs, lead)
    for idx, c in enumerate(cols):
        r = m.column(c)
        aug = [0] * k
        aug[idx] = 1
        d = 1
        for (pos, pr, paug, lead) in pivots:
            f = r[pos]
            if f:
                r = [(lead * x - f * y) // d for x, y in zip(r, pr)]
                aug = [(lead * x - f * y) // d for x, y in zip(aug, paug)]
            else:
                r = [(lead * x) // d for x in r]
                aug = [(lead * x) // d for x in aug]
            d = lead
        pos = next((j for j, x in enumerate(r) if x), None)
        if pos is None:
            if idx != k - 1:
                return None  # a proper subset is already dependent
            if not all(aug):
                return None  # dependency does not use every column
            u = _normalize_primitive(aug)
            out = [0] * m.cols
            for i, col in enumerate(cols):
                out[col] = u[i]
            return out
        pivots.append((pos, r, aug, r[pos]))
    return None  # columns are independent
