"""The W(i,k) family: closed form, determinant identity, and full-pipeline check."""

from __future__ import annotations

from fractions import Fraction

from .elimination import det_fraction


def wik_value(i: int, k: int) -> int:
    """Measure of W(i,k): 0 when k is odd, 1 when k is even."""
    if not (isinstance(i, int) and isinstance(k, int)) or not 0 <= i < k:
        raise ValueError("need integers 0 <= i < k")
    return 0 if k % 2 else 1


def wik_matrix(k: int) -> list[list[Fraction]]:
    """(k-1)x(k-1) matrix with -(k-1)/k on the diagonal and 1/k elsewhere."""
    if k < 3:
        raise ValueError("need k >= 3")
    n = k - 1
    return [[Fraction(-(k - 1), k) if r == c else Fraction(1, k) for c in range(n)] for r in range(n)]


def wik_determinant(k: int) -> Fraction:
    return det_fraction(wik_matrix(k))


def wik_pipeline_value(i: int, k: int) -> Fraction:
    """Measure of W(i,k) computed from the automaton through the linear solver."""
    from ..automata import language_w
    from ..pipeline import run_pipeline
    from .solve import solve_linear_exact

    p = run_pipeline(language_w(i, k))
    sol = solve_linear_exact(p.system)
    return sol.evaluate(p.target_binding).as_fraction()
