"""Exact linear algebra and resultants."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from ..poly import Poly


def det_fraction(matrix: Sequence[Sequence[Fraction | int]]) -> Fraction:
    """Determinant by Gaussian elimination over the rationals."""
    a = [[Fraction(x) for x in row] for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return det


def solve_fraction(matrix: Sequence[Sequence[Fraction | int]], rhs: Sequence[Fraction | int]) -> list[Fraction]:
    """Unique solution of ``matrix · x = rhs``; raises ``ZeroDivisionError`` if singular."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def det_poly(matrix: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant over a polynomial ring by memoized cofactor expansion."""
    n = len(matrix)
    m = [[Poly.coerce(x) for x in row] for row in matrix]

    @lru_cache(maxsize=None)
    def minor(col: int, rows: frozenset) -> Poly:
        if col == n:
            return Poly.const(1)
        total = Poly()
        sign = 1
        for r in sorted(rows):
            entry = m[r][col]
            if entry:
                sub = minor(col + 1, rows - {r})
                if sub:
                    total = total + entry * sub if sign > 0 else total - entry * sub
            sign = -sign
        return total

    return minor(0, frozenset(range(n)))


def sylvester(f: Poly, g: Poly, var: str) -> list[list[Poly]]:
    cf, cg = f.coefficients(var), g.coefficients(var)
    m, n = f.degree(var), g.degree(var)
    size = m + n
    rows = []
    for i in range(n):
        rows.append([cf.get(m - (j - i), Poly()) if 0 <= j - i <= m else Poly() for j in range(size)])
    for i in range(m):
        rows.append([cg.get(n - (j - i), Poly()) if 0 <= j - i <= n else Poly() for j in range(size)])
    return rows


def resultant(f: Poly, g: Poly, var: str) -> Poly:
    """Res_var(f, g).  Vanishes exactly where f and g share a root in ``var``."""
    m, n = f.degree(var), g.degree(var)
    if m < 0 or n < 0:
        return Poly()
    if m == 0 and n == 0:
        return Poly.const(1)
    if m == 0:
        return f ** n
    if n == 0:
        return g ** m
    return det_poly(sylvester(f, g, var))
