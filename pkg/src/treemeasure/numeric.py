"""Floating-point nested Kleene iteration and monotone bracketing."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fixpoint import MU, FixpointSystem, classify

MONOTONE_SLACK = 1e-12


class NonMonotoneError(ValueError):
    """The iteration moved against the direction monotonicity guarantees."""


@dataclass(frozen=True)
class NumericConfig:
    tol: float = 1e-12
    max_inner_iters: int = 1_000_000
    outer_rounds: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_inner_iters < 1 or self.outer_rounds < 1:
            raise ValueError("iteration budgets must be positive")


@dataclass(frozen=True)
class NumericSolution:
    values: tuple[float, ...]
    residual: float
    iterations: int
    converged: bool
    variables: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.variables, self.values))

    def __getitem__(self, var: str) -> float:
        return self.values[self.variables.index(var)]


class _Compiled:
    def __init__(self, sys: FixpointSystem):
        self.vars = sys.variables
        index = sys.var_index
        self.rows = [e.rhs.compile(index) for e in sys.equations]
        self.baskets = []
        for prio, members in sys.baskets():
            q = MU if prio % 2 else "NU"
            self.baskets.append((q, [index[v] for v in members]))

    def step(self, x, idx):
        rows = self.rows
        return [rows[i](x) for i in idx]

    def residual(self, x) -> float:
        return max((abs(x[i] - r(x)) for i, r in enumerate(self.rows)), default=0.0)


class _Budget:
    def __init__(self):
        self.iterations = 0
        self.converged = True


def _solve_level(c: _Compiled, level: int, x: list, cfg: NumericConfig, budget: _Budget) -> None:
    """Solve baskets ``level..`` in place, holding outer baskets fixed."""
    q, idx = c.baskets[level]
    start = 0.0 if q == MU else 1.0
    for i in idx:
        x[i] = start
    innermost = level == len(c.baskets) - 1
    limit = cfg.max_inner_iters if innermost else cfg.outer_rounds
    direction = 1.0 if q == MU else -1.0
    for _ in range(limit):
        if not innermost:
            _solve_level(c, level + 1, x, cfg, budget)
        new = c.step(x, idx)
        budget.iterations += 1
        move = 0.0
        for i, v in zip(idx, new):
            delta = v - x[i]
            if direction * delta < -MONOTONE_SLACK:
                raise NonMonotoneError(f"basket iteration is not monotone (step {delta:.3e})")
            move = max(move, abs(delta))
            x[i] = v
        if move < cfg.tol:
            break
    else:
        budget.converged = False
    if not innermost:
        _solve_level(c, level + 1, x, cfg, budget)


def solve_numeric(sys: FixpointSystem, cfg: NumericConfig | None = None) -> NumericSolution:
    """Nested iteration: each outer step re-solves all inner baskets from scratch."""
    cfg = cfg or NumericConfig()
    if not sys.equations:
        return NumericSolution((), 0.0, 0, True, ())
    c = _Compiled(sys)
    x = [0.0] * len(c.vars)
    budget = _Budget()
    _solve_level(c, 0, x, cfg, budget)
    x = [min(1.0, max(0.0, v)) for v in x]
    res = c.residual(x)
    converged = budget.converged and res <= 10 * cfg.tol and all(math.isfinite(v) for v in x)
    return NumericSolution(tuple(x), res, budget.iterations, converged, tuple(c.vars))


@dataclass(frozen=True)
class Bracket:
    """``lower``/``upper`` iterates from 0 and 1.

    Both are sound bounds for the extremal fixed point of the system.
    ``ambiguous`` is set when they have not met, which happens when iterates
    are still moving or when the system has several fixed points (the far
    iterate then approaches the wrong one).
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    ambiguous: bool
    variables: tuple[str, ...] = ()

    @property
    def width(self) -> float:
        return max((u - l for l, u in zip(self.lower, self.upper)), default=0.0)


def bracket(sys: FixpointSystem, n_iters: int, tol: float = 1e-9) -> Bracket:
    cls = classify(sys)
    if cls.mixed:
        raise ValueError("bracketing needs a system with a single quantifier")
    c = _Compiled(sys)
    everything = list(range(len(c.vars)))

    def iterate(start: float, direction: float):
        x = [start] * len(c.vars)
        for _ in range(n_iters):
            new = c.step(x, everything)
            for a, b in zip(x, new):
                if direction * (b - a) < -MONOTONE_SLACK:
                    raise NonMonotoneError("iteration is not monotone")
            x = new
        return tuple(x)

    lower = iterate(0.0, 1.0)
    upper = iterate(1.0, -1.0)
    amb = any(u - l > tol for l, u in zip(lower, upper))
    return Bracket(lower, upper, amb, tuple(c.vars))
