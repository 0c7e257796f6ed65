"""Dense univariate integer polynomials and Descartes root isolation."""

from __future__ import annotations

from fractions import Fraction
from math import comb, gcd
from typing import Iterable, Sequence

import sympy

from ..poly import Poly


class IntPoly:
    """Integer coefficients in ascending order; trailing zeros are stripped."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def from_rational(cls, coeffs: Sequence[Fraction | int]) -> "IntPoly":
        """Clear denominators of rational ascending coefficients (no normalization)."""
        den = 1
        for q in coeffs:
            q = Fraction(q)
            den = den * q.denominator // gcd(den, q.denominator)
        return cls(int(Fraction(q) * den) for q in coeffs)

    @classmethod
    def from_poly(cls, p: Poly, var: str) -> "IntPoly":
        extra = p.variables() - {var}
        if extra:
            raise ValueError(f"polynomial is not univariate in {var}: also uses {sorted(extra)}")
        n = max(p.degree(var), 0)
        dense = [Fraction(0)] * (n + 1)
        for mono, c in p.terms.items():
            dense[dict(mono).get(var, 0)] += c
        return cls.from_rational(dense)

    def to_poly(self, var: str) -> Poly:
        """Multivariate view, highest degree first (the usual printing order)."""
        return Poly([((((var, i),) if i else ()), c) for i, c in reversed(list(enumerate(self.coeffs)))])

    def to_sympy(self, x: sympy.Symbol) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.coeffs)) or [0], x, domain="ZZ")

    @classmethod
    def from_sympy(cls, p: sympy.Poly) -> "IntPoly":
        qs = [sympy.Rational(c) for c in reversed(p.all_coeffs())]
        return cls.from_rational([Fraction(int(q.p), int(q.q)) for q in qs])

    # basic structure ----------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"IntPoly({self.format()!r})"

    def normalized(self) -> "IntPoly":
        """Content removed, leading coefficient positive."""
        if not self.coeffs:
            return self
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        s = -1 if self.leading < 0 else 1
        return IntPoly(s * c // g for c in self.coeffs)

    def __call__(self, x: Fraction | int) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x: Fraction | int) -> int:
        v = self(x)
        return (v > 0) - (v < 0)

    def derivative(self) -> "IntPoly":
        return IntPoly(i * c for i, c in enumerate(self.coeffs) if i)

    def squarefree(self) -> "IntPoly":
        x = sympy.Symbol("x")
        return IntPoly.from_sympy(self.to_sympy(x).sqf_part()).normalized()

    def factors(self) -> list["IntPoly"]:
        """Distinct irreducible factors over the rationals, normalized."""
        x = sympy.Symbol("x")
        _, fl = sympy.factor_list(self.to_sympy(x))
        return [IntPoly.from_sympy(f).normalized() for f, _ in fl]

    def format(self, var: str = "x") -> str:
        return self.to_poly(var).format() if self.coeffs else "0"

    # root isolation -----------------------------------------------------
    def cauchy_bound(self) -> int:
        """Every real root lies strictly inside (-B, B)."""
        lead = abs(self.leading)
        m = max((abs(c) for c in self.coeffs[:-1]), default=0)
        return 1 + -(-m // lead) + 1

    def isolate(self, lo: Fraction | int | None = None, hi: Fraction | int | None = None
                ) -> list[tuple[Fraction, Fraction]]:
        """Isolate the real roots in the closed interval ``[lo, hi]``.

        Returns sorted pairs.  A pair ``(r, r)`` is an exact rational root;
        otherwise the open interval ``(a, b)`` holds exactly one root and the
        polynomial has opposite nonzero signs at ``a`` and ``b``.  The input
        must be squarefree.
        """
        if not self.coeffs:
            raise ValueError("cannot isolate roots of the zero polynomial")
        if self.degree == 0:
            return []
        if lo is None or hi is None:
            b = self.cauchy_bound()
            lo = -b if lo is None else lo
            hi = b if hi is None else hi
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            return []
        out: list[tuple[Fraction, Fraction]] = []
        if self(lo) == 0:
            out.append((lo, lo))
        if hi > lo:
            if self(hi) == 0:
                end = [(hi, hi)]
            else:
                end = []
            width = hi - lo
            local = _compose_affine(self.coeffs, lo, width)
            for kind, c, k in _isolate01(local):
                a = lo + width * Fraction(c, 2 ** k)
                if kind == "point":
                    out.append((a, a))
                else:
                    out.append(self._clean_open(a, lo + width * Fraction(c + 1, 2 ** k)))
            out.extend(end)
        out.sort()
        return out

    def count_open(self, a: Fraction, b: Fraction) -> int:
        """Descartes bound on the number of roots in the open interval (a, b)."""
        return _descartes01(_compose_affine(self.coeffs, a, b - a))

    def _clean_open(self, a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
        # shrink an isolating interval until neither end is a root
        while self(a) == 0 or self(b) == 0:
            m = (a + b) / 2
            if self(m) == 0:
                return (m, m)
            if self.count_open(a, m) == 1:
                b = m
            else:
                a = m
        return (a, b)


def _sign_variations(cs: Sequence[int]) -> int:
    last = 0
    n = 0
    for c in cs:
        if c:
            s = 1 if c > 0 else -1
            if last and s != last:
                n += 1
            last = s
    return n


def _taylor_shift1(cs: Sequence[int]) -> list[int]:
    """Coefficients of p(x + 1)."""
    a = list(cs)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += a[j + 1]
    return a


def _compose_affine(cs: Sequence[int], lo: Fraction, width: Fraction) -> list[int]:
    """Integer coefficients of p(lo + width*x), scaled by a positive constant."""
    n = len(cs) - 1
    res = [Fraction(0)] * (n + 1)
    for i, c in enumerate(cs):
        if not c:
            continue
        # c * (lo + width x)^i
        for j in range(i + 1):
            res[j] += c * comb(i, j) * lo ** (i - j) * width ** j
    scaled = list(IntPoly.from_rational(res).coeffs)
    return scaled + [0] * (n + 1 - len(scaled))


def _descartes01(cs: Sequence[int]) -> int:
    """Upper bound (exact when 0 or 1) for the number of roots in (0, 1)."""
    return _sign_variations(_taylor_shift1(list(reversed(cs))))


def _isolate01(cs: list[int]):
    """Yield ("point", c, k) or ("open", c, k) for roots in (0,1), scaled to (c/2^k, (c+1)/2^k)."""
    stack = [(cs, 0, 0)]
    found = []
    while stack:
        p, c, k = stack.pop()
        v = _descartes01(p)
        if v == 0:
            continue
        if v == 1:
            found.append(("open", c, k))
            continue
        n = len(p) - 1
        left = [p[i] * 2 ** (n - i) for i in range(n + 1)]  # 2^n p(x/2)
        right = _taylor_shift1(left)  # 2^n p((x+1)/2)
        if right[0] == 0:
            found.append(("point", 2 * c + 1, k + 1))
        stack.append((left, 2 * c, k + 1))
        stack.append((right, 2 * c + 1, k + 1))
    return found
