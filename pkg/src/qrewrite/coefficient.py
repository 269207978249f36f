"""Exact complex coefficients over the field Q(i, sqrt2).

Every numeric literal the engine manipulates lives in this field:
rationals, i, and sqrt2, closed under +, *, conjugation and division.
A value is stored as four exact rationals (a, b, c, d) meaning

    (a + b*sqrt2) + i*(c + d*sqrt2)

so sqrt2 * sqrt2 == 2 holds exactly and no floating point enters the
symbolic layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

RationalLike = Union[int, Fraction]


def _frac(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Coefficient:
    """An element (re_rat + re_sqrt2*sqrt2) + i*(im_rat + im_sqrt2*sqrt2)."""

    re_rat: Fraction = Fraction(0)
    re_sqrt2: Fraction = Fraction(0)
    im_rat: Fraction = Fraction(0)
    im_sqrt2: Fraction = Fraction(0)

    @staticmethod
    def of(re_rat: RationalLike = 0, re_sqrt2: RationalLike = 0,
           im_rat: RationalLike = 0, im_sqrt2: RationalLike = 0) -> "Coefficient":
        return Coefficient(_frac(re_rat), _frac(re_sqrt2),
                           _frac(im_rat), _frac(im_sqrt2))

    @staticmethod
    def from_rational(x: RationalLike) -> "Coefficient":
        return Coefficient.of(re_rat=x)

    def __add__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.re_rat + other.re_rat,
                           self.re_sqrt2 + other.re_sqrt2,
                           self.im_rat + other.im_rat,
                           self.im_sqrt2 + other.im_sqrt2)

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.re_rat, -self.re_sqrt2,
                           -self.im_rat, -self.im_sqrt2)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        # Complex product with real/imag parts in Q(sqrt2):
        # (x1 + i y1)(x2 + i y2) = (x1 x2 - y1 y2) + i (x1 y2 + y1 x2)
        # where each part is (rat, sqrt2-multiple) and
        # (a1 + b1 s)(a2 + b2 s) = (a1 a2 + 2 b1 b2) + (a1 b2 + b1 a2) s.
        def qmul(a1, b1, a2, b2):
            return a1 * a2 + 2 * b1 * b2, a1 * b2 + b1 * a2

        xr, xs = qmul(self.re_rat, self.re_sqrt2, other.re_rat, other.re_sqrt2)
        yr, ys = qmul(self.im_rat, self.im_sqrt2, other.im_rat, other.im_sqrt2)
        zr, zs = qmul(self.re_rat, self.re_sqrt2, other.im_rat, other.im_sqrt2)
        wr, ws = qmul(self.im_rat, self.im_sqrt2, other.re_rat, other.re_sqrt2)
        return Coefficient(xr - yr, xs - ys, zr + wr, zs + ws)

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.re_rat, self.re_sqrt2,
                           -self.im_rat, -self.im_sqrt2)

    def inverse(self) -> "Coefficient":
        """Multiplicative inverse; raises ZeroDivisionError on zero."""
        if self.is_zero():
            raise ZeroDivisionError("coefficient is zero")
        # 1/z = conj(z) / |z|^2 with |z|^2 = a + b*sqrt2 real in Q(sqrt2),
        # then 1/(a + b s) = (a - b s)/(a^2 - 2 b^2); the denominator is
        # nonzero because sqrt2 is irrational.
        conj = self.conjugate()
        sq = self * conj
        a, b = sq.re_rat, sq.re_sqrt2
        den = a * a - 2 * b * b
        inv_norm = Coefficient(a / den, -b / den, Fraction(0), Fraction(0))
        return conj * inv_norm

    def __truediv__(self, other: "Coefficient") -> "Coefficient":
        return self * other.inverse()

    def is_zero(self) -> bool:
        return (self.re_rat == 0 and self.re_sqrt2 == 0
                and self.im_rat == 0 and self.im_sqrt2 == 0)

    def is_one(self) -> bool:
        return (self.re_rat == 1 and self.re_sqrt2 == 0
                and self.im_rat == 0 and self.im_sqrt2 == 0)

    def is_rational(self) -> bool:
        return self.re_sqrt2 == 0 and self.im_rat == 0 and self.im_sqrt2 == 0

    def to_complex(self) -> complex:
        s = 2 ** 0.5
        return complex(float(self.re_rat) + float(self.re_sqrt2) * s,
                       float(self.im_rat) + float(self.im_sqrt2) * s)

    def __repr__(self) -> str:
        return f"Coefficient({render_coefficient(self)})"


ZERO = Coefficient.of(0)
ONE = Coefficient.of(1)
MINUS_ONE = Coefficient.of(-1)
TWO = Coefficient.of(2)
HALF = Coefficient.of(Fraction(1, 2))
I_UNIT = Coefficient.of(im_rat=1)
SQRT2 = Coefficient.of(re_sqrt2=1)
ONE_OVER_SQRT2 = Coefficient.of(re_sqrt2=Fraction(1, 2))  # sqrt2/2 == 1/sqrt2


def _sqrt2_component(b: Fraction, prefix: str = "") -> str:
    """Render b*sqrt2, optionally with an 'i*' prefix for imaginary parts."""
    if b == 1:
        return f"{prefix}sqrt2"
    if b == -1:
        return f"-{prefix}sqrt2"
    if b.denominator == 1:
        return f"{b}*{prefix}sqrt2"
    twice = 2 * b
    if twice.denominator == 1:
        # b*sqrt2 == (2b)/sqrt2; favours the familiar 1/sqrt2 spelling
        return f"{twice}/{prefix}sqrt2" if prefix == "" else f"{twice}*{prefix}1/sqrt2"
    return f"{b}*{prefix}sqrt2"


def render_coefficient(c: Coefficient) -> str:
    """Canonical text for a coefficient; parse_coefficient inverts it."""
    parts: list[str] = []
    if c.re_rat != 0:
        parts.append(str(c.re_rat))
    if c.re_sqrt2 != 0:
        parts.append(_sqrt2_component(c.re_sqrt2))
    if c.im_rat != 0:
        if c.im_rat == 1:
            parts.append("i")
        elif c.im_rat == -1:
            parts.append("-i")
        else:
            parts.append(f"{c.im_rat}*i")
    if c.im_sqrt2 != 0:
        b = c.im_sqrt2
        if b == 1:
            parts.append("i*sqrt2")
        elif b == -1:
            parts.append("-i*sqrt2")
        else:
            twice = 2 * b
            if b.denominator == 1:
                parts.append(f"{b}*i*sqrt2")
            elif twice.denominator == 1:
                parts.append(f"{twice}*i/sqrt2")
            else:
                parts.append(f"{b}*i*sqrt2")
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += p if p.startswith("-") else "+" + p
    return out
