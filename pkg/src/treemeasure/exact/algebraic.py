"""Rational intervals and real algebraic numbers."""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .intpoly import IntPoly

Rational = Union[int, Fraction]


class Interval:
    """Closed interval with rational endpoints and exact arithmetic."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Rational, hi: Rational | None = None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo, self.hi = lo, hi

    @staticmethod
    def of(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Rational) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __add__(self, o):
        o = Interval.of(o)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-Interval.of(o))

    def __rsub__(self, o):
        return Interval.of(o) - self

    def __mul__(self, o):
        o = Interval.of(o)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(ps), max(ps))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        if n == 0:
            return Interval(1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 0 and self.lo <= 0 <= self.hi:
            return Interval(0, max(a, b))
        return Interval(min(a, b), max(a, b))

    def __eq__(self, o):
        return isinstance(o, Interval) and (self.lo, self.hi) == (o.lo, o.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"


class AlgebraicNumber:
    """A real root of a squarefree integer polynomial, pinned by an isolating interval.

    Rational numbers are represented with a linear defining polynomial and a
    degenerate interval.  Refinement narrows a cached interval by bisection
    with exact sign tests, so successive refinements are nested.
    """

    __slots__ = ("defining", "_lo", "_hi", "_slo", "_minpoly")

    def __init__(self, defining: IntPoly, lo: Rational, hi: Rational):
        defining = defining.normalized()
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("isolating interval is empty")
        if lo == hi:
            if defining(lo) != 0:
                raise ValueError(f"{lo} is not a root of {defining.format()}")
        else:
            slo, shi = defining.sign_at(lo), defining.sign_at(hi)
            if slo == 0 or shi == 0 or slo == shi:
                raise ValueError("interval endpoints must have opposite nonzero signs")
            if defining.count_open(lo, hi) != 1:
                raise ValueError("interval does not isolate a single root")
        self.defining = defining
        self._lo, self._hi = lo, hi
        self._slo = defining.sign_at(lo)
        self._minpoly = None
        if lo == hi:
            q = lo
            self.defining = IntPoly([-q.numerator, q.denominator])

    @classmethod
    def rational(cls, q: Rational) -> "AlgebraicNumber":
        q = Fraction(q)
        return cls(IntPoly([-q.numerator, q.denominator]), q, q)

    @classmethod
    def from_isolation(cls, defining: IntPoly, pair: tuple[Fraction, Fraction]) -> "AlgebraicNumber":
        lo, hi = pair
        if lo == hi:
            return cls.rational(lo)
        return cls(defining, lo, hi)

    # queries ------------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self._lo == self._hi

    @property
    def interval(self) -> tuple[Fraction, Fraction]:
        return (self._lo, self._hi)

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("not a rational number")
        return self._lo

    def refine(self, width: Rational) -> tuple[Fraction, Fraction]:
        """Shrink the isolating interval to at most ``width``; returns it."""
        width = Fraction(width)
        if width <= 0:
            raise ValueError("width must be positive")
        p = self.defining
        while self._hi - self._lo > width:
            m = (self._lo + self._hi) / 2
            s = p.sign_at(m)
            if s == 0:
                self._lo = self._hi = m
                self.defining = IntPoly([-m.numerator, m.denominator])
                break
            if s == self._slo:
                self._lo = m
            else:
                self._hi = m
        return (self._lo, self._hi)

    def enclosure(self, bits: int) -> Interval:
        lo, hi = self.refine(Fraction(1, 2 ** bits))
        return Interval(lo, hi)

    def minimal_polynomial(self) -> IntPoly:
        if self._minpoly is None:
            if self.is_rational:
                self._minpoly = self.defining.normalized()
            else:
                lo, hi = self._lo, self._hi
                for f in self.defining.factors():
                    if f.sign_at(lo) * f.sign_at(hi) < 0:
                        self._minpoly = f
                        break
                else:  # pragma: no cover - the defining polynomial is squarefree
                    raise ArithmeticError("no factor vanishes in the isolating interval")
        return self._minpoly

    @property
    def degree(self) -> int:
        return self.minimal_polynomial().degree

    def __float__(self):
        lo, hi = self.refine(Fraction(1, 2 ** 60))
        return float((lo + hi) / 2)

    def decimal(self, digits: int = 12) -> str:
        lo, hi = self.refine(Fraction(1, 10 ** (digits + 2)))
        mid = (lo + hi) / 2
        scaled = round(mid * 10 ** digits)
        sign = "-" if scaled < 0 else ""
        scaled = abs(scaled)
        whole, frac = divmod(scaled, 10 ** digits)
        return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"

    # comparisons --------------------------------------------------------
    def _separate(self, other: "AlgebraicNumber") -> int:
        """-1, 0, 1 as self <, =, > other."""
        if self.is_rational and other.is_rational:
            a, b = self._lo, other._lo
            return (a > b) - (a < b)
        if self.minimal_polynomial() == other.minimal_polynomial():
            f = self.minimal_polynomial()
            roots = f.isolate()
            return (self._root_index(roots) > other._root_index(roots)) - (
                self._root_index(roots) < other._root_index(roots))
        width = Fraction(1)
        while True:
            a, b = self.refine(width), other.refine(width)
            if a[1] < b[0]:
                return -1
            if b[1] < a[0]:
                return 1
            width /= 2

    def _root_index(self, roots) -> int:
        width = Fraction(1)
        while True:
            lo, hi = self.refine(width)
            hits = [i for i, (a, b) in enumerate(roots) if a <= hi and lo <= b]
            if len(hits) == 1:
                return hits[0]
            width /= 2

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlgebraicNumber.rational(other)
        if not isinstance(other, AlgebraicNumber):
            return NotImplemented
        return self._separate(other) == 0

    def __lt__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlgebraicNumber.rational(other)
        return self._separate(other) < 0

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlgebraicNumber.rational(other)
        return self._separate(other) > 0

    def __ge__(self, other):
        return self == other or self > other

    def __hash__(self):
        return hash(self.minimal_polynomial())

    def decimal_interval(self, digits: int = 12) -> tuple[str, str]:
        """Enclosure with endpoints rounded outward to ``digits`` decimals."""
        if self.is_rational:
            d = self.decimal(digits)
            if Fraction(d) == self._lo:
                return (d, d)
        lo, hi = self.refine(Fraction(1, 10 ** (digits + 1)))
        scale = 10 ** digits
        a = (lo * scale).__floor__()
        b = (hi * scale).__ceil__()
        return (_fixed(a, digits), _fixed(b, digits))

    def format(self, var: str = "x") -> str:
        if self.is_rational:
            q = self._lo
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        lo, hi = self.decimal_interval(12)
        return f"root of {self.minimal_polynomial().format(var)} in [{lo},{hi}] ≈ {self.decimal(12)}"

    def __repr__(self):
        return f"AlgebraicNumber({self.format()})"

    __str__ = format


def _fixed(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"
