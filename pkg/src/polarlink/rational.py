"""Exact linear algebra over the integers and rationals.

Matrices are plain nested lists (or anything indexable as ``A[i][j]``);
results are ``int`` or :class:`fractions.Fraction`, never floats.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def _as_fraction_matrix(A) -> Matrix:
    return [[Fraction(x) for x in row] for row in A]


def bareiss_det(A) -> int:
    """Determinant of a square integer matrix by fraction-free elimination.

    Every intermediate entry is an integer (a minor of ``A``), so there is
    no coefficient growth beyond Hadamard's bound and no rational arithmetic.
    """
    M = [[int(x) for x in row] for row in A]
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("bareiss_det needs a square matrix")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def row_echelon(A) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q. Returns (R, pivot_columns)."""
    R = _as_fraction_matrix(A)
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                factor = R[i][c]
                R[i] = [x - factor * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(A) -> int:
    if not len(A):
        return 0
    return len(row_echelon(A)[1])


class InconsistentSystem(ValueError):
    """The linear system has no solution."""


class UnderdeterminedSystem(ValueError):
    """The linear system has more than one solution."""


def solve(A, b: Sequence) -> list[Fraction]:
    """Unique solution of ``A x = b`` over Q; ``A`` may have more rows than columns.

    Raises :class:`InconsistentSystem` or :class:`UnderdeterminedSystem`
    when there is no solution or no unique one.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if len(b) != rows:
        raise ValueError("right-hand side length does not match row count")
    aug = [list(A[i]) + [b[i]] for i in range(rows)]
    R, pivots = row_echelon(aug)
    if cols in pivots:
        raise InconsistentSystem("system has no solution")
    if len(pivots) < cols:
        raise UnderdeterminedSystem(f"rank {len(pivots)} < {cols} unknowns")
    return [R[i][cols] for i in range(cols)]


def inverse(A) -> Matrix:
    n = len(A)
    aug = [list(A[i]) + [int(i == j) for j in range(n)] for i in range(n)]
    R, pivots = row_echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def matmul(A, B) -> Matrix:
    inner = len(B)
    return [
        [sum((Fraction(A[i][k]) * B[k][j] for k in range(inner)), Fraction(0))
         for j in range(len(B[0]))]
        for i in range(len(A))
    ]


def transpose(A) -> list[list]:
    return [list(col) for col in zip(*A)]
