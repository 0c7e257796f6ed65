"""Sparse multivariate polynomials with exact rational coefficients.

Terms are kept in insertion order, which is what lets printed systems read
``1/3 + 2/3 x1^2`` in the order the rows were built (letter order of the
alphabet) rather than in some canonical monomial order.  Equality ignores
term order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Mapping, Union

Monomial = tuple[tuple[str, int], ...]
Number = Union[int, Fraction]

_NAT = re.compile(r"(\d+)")


def var_key(name: str):
    """Natural sort key, so that x2 sorts before x10."""
    return [int(t) if t.isdigit() else t for t in _NAT.split(name)]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items(), key=lambda ve: var_key(ve[0])))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | Iterable[tuple[Monomial, Number]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for mono, c in items:
            c = Fraction(c)
            if c:
                acc[mono] = acc.get(mono, Fraction(0)) + c
        self.terms = {m: c for m, c in acc.items() if c}

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls({(): c})

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): 1})

    @staticmethod
    def coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly.const(x)
        raise TypeError(f"cannot treat {x!r} as a polynomial")

    # arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "Poly":
        other = Poly.coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly.coerce(other))

    def __rsub__(self, other) -> "Poly":
        return Poly.coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = Poly.coerce(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative exponent")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        return f"Poly({self.format()!r})"

    def __str__(self) -> str:
        return self.format()

    # inspection ---------------------------------------------------------
    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def degree(self, var: str | None = None) -> int:
        """Total degree, or the degree in ``var``.  The zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e for _, e in m) for m in self.terms)
        return max(dict(m).get(var, 0) for m in self.terms)

    def coefficients(self, var: str) -> dict[int, "Poly"]:
        """View as a polynomial in ``var`` with polynomial coefficients."""
        out: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            e = dict(m).get(var, 0)
            rest = tuple((v, k) for v, k in m if v != var)
            out.setdefault(e, {})[rest] = c
        return {e: Poly(t) for e, t in out.items()}

    def diff(self, var: str) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            e = dict(m).get(var, 0)
            if e == 0:
                continue
            mono = tuple((v, k - 1 if v == var else k) for v, k in m if not (v == var and k == 1))
            out[mono] = out.get(mono, Fraction(0)) + c * e
        return Poly(out)

    # evaluation and substitution ---------------------------------------
    def evaluate(self, env: Mapping[str, object]):
        """Evaluate with arbitrary ring-like values (Fraction, float, Interval)."""
        total = 0
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                term = term * (env[v] if e == 1 else env[v] ** e)
            total = total + term
        return total

    def substitute(self, mapping: Mapping[str, "Poly | Number"]) -> "Poly":
        if not mapping or not (self.variables() & mapping.keys()):
            return self
        subs = {k: Poly.coerce(v) for k, v in mapping.items()}
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            piece = Poly.const(c)
            keep: list[tuple[str, int]] = []
            for v, e in m:
                if v in subs:
                    piece = piece * subs[v] ** e
                else:
                    keep.append((v, e))
            if keep:
                piece = piece * Poly({tuple(keep): 1})
            for pm, pc in piece.terms.items():
                out[pm] = out.get(pm, Fraction(0)) + pc
        return Poly(out)

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        return self.substitute({k: Poly.var(v) for k, v in mapping.items()})

    def compile(self, index: Mapping[str, int]) -> Callable[[list], float]:
        """Return a fast float evaluator over a vector indexed by ``index``."""
        plan = [(float(c), [(index[v], e) for v, e in m]) for m, c in self.terms.items()]

        def run(x):
            s = 0.0
            for c, factors in plan:
                t = c
                for i, e in factors:
                    t *= x[i] if e == 1 else x[i] ** e
                s += t
            return s

        return run

    # normalisation ------------------------------------------------------
    def integer_scaled(self) -> "Poly":
        """Clear denominators and remove content; the sign is left alone."""
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // gcd(den, c.denominator)
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, n)
        return Poly({m: Fraction(n, g) for m, n in zip(self.terms, nums)})

    def ordered(self, var: str) -> "Poly":
        """Same polynomial with terms sorted by descending degree in ``var``."""
        items = sorted(self.terms.items(), key=lambda mc: -dict(mc[0]).get(var, 0))
        return Poly(items)

    # printing -----------------------------------------------------------
    def format(self) -> str:
        """Render in the ``1/3 + 2/3 x1^2`` style (also valid qepcad syntax)."""
        if not self.terms:
            return "0"
        parts: list[str] = []
        for i, (m, c) in enumerate(self.terms.items()):
            mono = " ".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            a = abs(c)
            if not mono:
                body = _fmt_fraction(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_fmt_fraction(a)} {mono}"
            if i == 0:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {body}")
        return " ".join(parts)


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


X = Poly.var


def coproduct(*factors: Poly) -> Poly:
    """1 - prod(1 - x_i), expanded."""
    prod = Poly.const(1)
    for f in factors:
        prod = prod * (1 - f)
    return 1 - prod
