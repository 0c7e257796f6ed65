"""Exact backend: algebraic numbers, elimination, and exact fixed points."""

from .algebraic import AlgebraicNumber, Interval
from .elimination import det_fraction, resultant, solve_fraction
from .intpoly import IntPoly
from .solve import (ExactAmbiguity, ExactSolution, ExactUnsupported, NoRootError, solve_exact,
                    solve_linear_exact, solve_triangular_exact)
from .wik import wik_determinant, wik_matrix, wik_pipeline_value, wik_value

__all__ = [
    "AlgebraicNumber", "ExactAmbiguity", "ExactSolution", "ExactUnsupported", "IntPoly", "Interval",
    "NoRootError", "det_fraction", "resultant", "solve_exact", "solve_fraction", "solve_linear_exact",
    "solve_triangular_exact", "wik_determinant", "wik_matrix", "wik_pipeline_value", "wik_value",
]
