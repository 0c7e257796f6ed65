"""Exact solutions of simplified fixed-point systems.

Variables are solved one strongly connected component at a time, in
dependency order.  A singleton component is a univariate problem once the
earlier values are eliminated by resultants; its candidate roots are isolated
in [0, 1] and the least (μ) or greatest (ν) genuine one is kept.  Resultants
may add roots belonging to conjugates of earlier values, so every candidate is
checked against the original equation with interval arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ..fixpoint import LINEAR, MU, TRIANGULAR, FixpointSystem, classify
from ..poly import Poly
from .algebraic import AlgebraicNumber, Interval
from .elimination import det_fraction, resultant, solve_fraction
from .intpoly import IntPoly

MAX_BITS = 256


class ExactUnsupported(Exception):
    """The system is outside what the exact backend handles."""


class ExactAmbiguity(ArithmeticError):
    """The fixed point could not be pinned down (singular reduced system, etc.)."""


class NoRootError(ArithmeticError):
    """No candidate root in [0, 1]; the equation is not a monotone self-map."""


@dataclass
class ExactSolution:
    values: dict[str, AlgebraicNumber]
    method: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def minimal_polynomials(self) -> dict[str, IntPoly]:
        return {v: a.minimal_polynomial() for v, a in self.values.items()}

    def __getitem__(self, var: str) -> AlgebraicNumber:
        return self.values[var]

    def evaluate(self, binding: Poly) -> AlgebraicNumber:
        """Value of a binding that is a constant or a single variable."""
        if binding.is_constant():
            return AlgebraicNumber.rational(binding.constant_term())
        if len(binding.terms) == 1:
            (mono, c), = binding.terms.items()
            if c == 1 and len(mono) == 1 and mono[0][1] == 1:
                return self.values[mono[0][0]]
        raise ExactUnsupported(f"cannot evaluate binding {binding.format()} exactly")


# helpers --------------------------------------------------------------------

def _as_poly(f: IntPoly, var: str) -> Poly:
    return f.to_poly(var)


def _eliminate(p: Poly, known: Mapping[str, AlgebraicNumber], keep: set[str]) -> Poly:
    """Substitute rational knowns and eliminate irrational ones by resultants."""
    rat = {v: a.as_fraction() for v, a in known.items() if a.is_rational and v in p.variables()}
    p = p.substitute(rat)
    for v in sorted(p.variables() - keep):
        if v not in known:
            raise ExactUnsupported(f"variable {v} has no known value")
        m = known[v].minimal_polynomial()
        p = resultant(p, _as_poly(m, v), v)
    return p


def _enclose(p: Poly, env: Mapping[str, AlgebraicNumber], bits: int) -> Interval:
    box = {v: env[v].enclosure(bits) for v in p.variables()}
    return Interval.of(p.evaluate(box))


def _refuted(p: Poly, env: Mapping[str, AlgebraicNumber], bits: int) -> bool:
    return not _enclose(p, env, bits).contains_zero()


def _is_exactly_zero(p: Poly, env: Mapping[str, AlgebraicNumber]) -> bool | None:
    if all(env[v].is_rational for v in p.variables()):
        return p.evaluate({v: env[v].as_fraction() for v in p.variables()}) == 0
    return None


def _candidates(p: Poly, x: str, known: Mapping[str, AlgebraicNumber]) -> list[AlgebraicNumber] | None:
    """Roots in [0,1] of the eliminant, ascending.  ``None`` means every x is a root."""
    r = _eliminate(p, known, {x})
    if not r:
        if not p.substitute({v: a.as_fraction() for v, a in known.items() if a.is_rational}):
            return None
        raise ExactUnsupported("eliminant vanishes identically")
    f = IntPoly.from_poly(r, x)
    if f.degree <= 0:
        return []
    f = f.squarefree()
    return [AlgebraicNumber.from_isolation(f, pair) for pair in f.isolate(0, 1)]


def _select(cands: list[AlgebraicNumber], p: Poly, x: str, known: Mapping[str, AlgebraicNumber]
            ) -> AlgebraicNumber | None:
    """First candidate (in the given order) not refuted as a root of ``p``."""
    alive = list(cands)
    needs_check = any(not known[v].is_rational for v in p.variables() if v != x)
    if not needs_check:
        return alive[0] if alive else None
    # refute candidates in order; the head is accepted once it survives MAX_BITS
    bits = 8
    while alive:
        env = dict(known)
        env[x] = alive[0]
        exact = _is_exactly_zero(p, env)
        if exact is True:
            return alive[0]
        if exact is False or _refuted(p, env, bits):
            alive.pop(0)
            continue
        if bits >= MAX_BITS:
            return alive[0]
        bits *= 2
    return None


def solve_stage(sys: FixpointSystem, var: str, known: Mapping[str, AlgebraicNumber]) -> AlgebraicNumber:
    eq = sys[var]
    p = eq.rhs - Poly.var(var)
    cands = _candidates(p, var, known)
    if cands is None:
        return AlgebraicNumber.rational(0 if eq.quantifier == MU else 1)
    if eq.quantifier != MU:
        cands.reverse()
    chosen = _select(cands, p, var, known)
    if chosen is None:
        raise NoRootError(f"no admissible root in [0,1] for {var}")
    return chosen


# linear components -------------------------------------------------------------

def _linear_parts(sys: FixpointSystem, comp: list[str], known: Mapping[str, AlgebraicNumber]):
    """Return (A, b) with rhs_i = Σ A[i][j] x_j + b_i over the component."""
    rat = {}
    for v, a in known.items():
        if not a.is_rational:
            raise ExactUnsupported("linear solving needs rational earlier values")
        rat[v] = a.as_fraction()
    pos = {v: i for i, v in enumerate(comp)}
    A = [[Fraction(0)] * len(comp) for _ in comp]
    b = [Fraction(0)] * len(comp)
    for i, v in enumerate(comp):
        rhs = sys[v].rhs.substitute({u: q for u, q in rat.items() if u in sys[v].rhs.variables()})
        if rhs.degree() > 1:
            raise ExactUnsupported(f"equation for {v} is not linear")
        for mono, c in rhs.terms.items():
            if not mono:
                b[i] += c
            else:
                A[i][pos[mono[0][0]]] += c
    return A, b


def solve_linear_component(sys: FixpointSystem, comp: list[str], known: Mapping[str, AlgebraicNumber]
                           ) -> tuple[dict[str, Fraction], str]:
    A, b = _linear_parts(sys, comp, known)
    n = len(comp)
    M = [[(1 if i == j else 0) - A[i][j] for j in range(n)] for i in range(n)]
    if det_fraction(M) != 0:
        x = solve_fraction(M, b)
        return dict(zip(comp, x)), "unique fixed point"
    prios = {v: sys[v].priority for v in comp}
    top = max(prios.values())
    outer = [i for i, v in enumerate(comp) if prios[v] == top]
    inner = [i for i in range(n) if i not in outer]
    c = Fraction(0 if top % 2 else 1)
    x = [Fraction(0)] * n
    for i in outer:
        x[i] = c
    if inner:
        Mr = [[M[i][j] for j in inner] for i in inner]
        if det_fraction(Mr) == 0:
            raise ExactAmbiguity("reduced linear system is singular")
        br = [b[i] + sum(A[i][j] * c for j in outer) for i in inner]
        for i, val in zip(inner, solve_fraction(Mr, br)):
            x[i] = val
    for i in outer:
        if sum(A[i][j] * x[j] for j in range(n)) + b[i] != x[i]:
            raise ExactAmbiguity("boundary value for the outermost basket is not a fixed point")
    return dict(zip(comp, x)), f"outermost basket fixed at {c}"


# two-variable components -------------------------------------------------------

def _pair(sys: FixpointSystem, comp: list[str], known: Mapping[str, AlgebraicNumber]
          ) -> dict[str, AlgebraicNumber]:
    a, b = comp
    if sys[a].priority == sys[b].priority or sys[a].quantifier == sys[b].quantifier:
        return _joint_pair(sys, comp, known)
    outer, inner = (a, b) if sys[a].priority > sys[b].priority else (b, a)
    p_in = sys[inner].rhs - Poly.var(inner)
    p_out = sys[outer].rhs - Poly.var(outer)
    res = resultant(_eliminate(p_in, known, {inner, outer}), _eliminate(p_out, known, {inner, outer}), inner)
    if not res or res.variables() - {outer}:
        raise ExactUnsupported("could not eliminate the inner variable")
    f = IntPoly.from_poly(res, outer)
    if f.degree <= 0:
        raise NoRootError("no common solution")
    f = f.squarefree()
    cands = [AlgebraicNumber.from_isolation(f, pr) for pr in f.isolate(0, 1)]
    if sys[outer].quantifier != MU:
        cands.reverse()
    for c in cands:
        env = dict(known)
        env[outer] = c
        try:
            v_in = solve_stage(sys, inner, env)
        except NoRootError:
            continue
        env[inner] = v_in
        exact = _is_exactly_zero(p_out, env)
        if exact is True:
            return {inner: v_in, outer: c}
        if exact is False:
            continue
        if not any(_refuted(p_out, env, bits) for bits in (8, 16, 32, 64, 128, MAX_BITS)):
            return {inner: v_in, outer: c}
    raise NoRootError("no candidate satisfies the outer equation")


def _joint_pair(sys, comp, known):
    a, b = comp
    pa = sys[a].rhs - Poly.var(a)
    pb = sys[b].rhs - Poly.var(b)
    ea, eb = _eliminate(pa, known, {a, b}), _eliminate(pb, known, {a, b})
    res = resultant(ea, eb, a)
    if not res or res.variables() - {b}:
        raise ExactUnsupported("could not eliminate a variable")
    f = IntPoly.from_poly(res, b).squarefree()
    pairs = []
    for pr in f.isolate(0, 1):
        cb = AlgebraicNumber.from_isolation(f, pr)
        env = dict(known)
        env[b] = cb
        cands = _candidates(pa, a, env) or []
        for ca in cands:
            env2 = dict(env)
            env2[a] = ca
            ok = True
            for p in (pa, pb):
                exact = _is_exactly_zero(p, env2)
                if exact is False or (exact is None and any(_refuted(p, env2, bits) for bits in (16, 64, MAX_BITS))):
                    ok = False
            if ok:
                pairs.append((ca, cb))
    if not pairs:
        raise NoRootError("no common solution in [0,1]^2")
    least = sys[a].quantifier == MU
    pick = min(pairs, key=lambda t: (float(t[0]), float(t[1]))) if least else \
        max(pairs, key=lambda t: (float(t[0]), float(t[1])))
    for other in pairs:
        if least and not (pick[0] <= other[0] and pick[1] <= other[1]):
            raise ExactAmbiguity("no componentwise least common solution")
        if not least and not (pick[0] >= other[0] and pick[1] >= other[1]):
            raise ExactAmbiguity("no componentwise greatest common solution")
    return {a: pick[0], b: pick[1]}


# entry points ------------------------------------------------------------------

def solve_exact(sys: FixpointSystem) -> ExactSolution:
    """Exact values for every variable, component by component."""
    values: dict[str, AlgebraicNumber] = {}
    methods = []
    for comp in sys.scc_order():
        if len(comp) == 1:
            values[comp[0]] = solve_stage(sys, comp[0], values)
            methods.append("stage")
            continue
        if all(sys[v].rhs.degree() <= 1 for v in comp):
            try:
                sol, how = solve_linear_component(sys, comp, values)
            except ExactUnsupported:
                pass
            else:
                values.update({v: AlgebraicNumber.rational(q) for v, q in sol.items()})
                methods.append(f"linear ({how})")
                continue
        if len(comp) == 2:
            values.update(_pair(sys, comp, values))
            methods.append("nested pair")
            continue
        raise ExactUnsupported(f"component {comp} is too large for exact solving")
    return ExactSolution(values, ", ".join(dict.fromkeys(methods)))


def solve_triangular_exact(sys: FixpointSystem) -> ExactSolution:
    if classify(sys).structure != TRIANGULAR:
        raise ValueError("system is not triangular")
    return solve_exact(sys)


def solve_linear_exact(sys: FixpointSystem) -> ExactSolution:
    if classify(sys).structure not in (LINEAR, TRIANGULAR) or any(e.rhs.degree() > 1 for e in sys.equations):
        raise ValueError("system is not linear")
    values: dict[str, AlgebraicNumber] = {}
    notes = []
    for comp in sys.scc_order():
        sol, how = solve_linear_component(sys, comp, values)
        values.update({v: AlgebraicNumber.rational(q) for v, q in sol.items()})
        notes.append(how)
    return ExactSolution(values, "linear", notes)
