"""Canonical form for scalar-sorted terms.

Scalar expressions are flattened into a polynomial over a fixed set of
atoms: named symbolic constants (possibly conjugated) and opaque inner
products of ground vectors.  Coefficients are exact Q(i, sqrt2) values,
so e.g. the product of two 1/sqrt2 factors collapses to exactly 1/2.

Conjugation is pushed all the way onto atoms (conj is an involution, it
distributes over sums and products, and it fixes every numeric's real
part while negating the imaginary part).  Inner products stay opaque:
conj(ip(x, y)) is kept as a conjugated atom rather than swapped to
ip(y, x), since that identity is only available as an opt-in rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coefficient import Coefficient, ONE, ZERO
from .errors import SortError
from .terms import (
    App, NumericScalar, ScalarAtom, ScalarSort, Term, conjugate, num,
    plus_s, sort_of, term_key, times_s,
)


@dataclass(frozen=True)
class AtomRef:
    """One multiplicand of a monomial: a named atom or an opaque ip term."""

    base: Term          # ScalarAtom or an ip application, unconjugated
    conjugated: bool

    def key(self) -> tuple:
        leading = 0 if isinstance(self.base, ScalarAtom) else 1
        return (leading, term_key(self.base), self.conjugated)

    def to_term(self) -> Term:
        return conjugate(self.base) if self.conjugated else self.base


@dataclass(frozen=True)
class ScalarMonomial:
    coeff: Coefficient
    atoms: tuple[AtomRef, ...]  # sorted multiset

    def atom_key(self) -> tuple:
        return tuple(a.key() for a in self.atoms)


@dataclass(frozen=True)
class ScalarPoly:
    """Sorted monomials with pairwise-distinct atom multisets; () is zero."""

    monomials: tuple[ScalarMonomial, ...]

    @staticmethod
    def constant(c: Coefficient) -> "ScalarPoly":
        if c.is_zero():
            return ScalarPoly(())
        return ScalarPoly((ScalarMonomial(c, ()),))

    @staticmethod
    def atom(base: Term) -> "ScalarPoly":
        return ScalarPoly((ScalarMonomial(ONE, (AtomRef(base, False),)),))

    def __add__(self, other: "ScalarPoly") -> "ScalarPoly":
        acc: dict[tuple, ScalarMonomial] = {}
        for m in self.monomials + other.monomials:
            k = m.atom_key()
            if k in acc:
                acc[k] = ScalarMonomial(acc[k].coeff + m.coeff, acc[k].atoms)
            else:
                acc[k] = m
        kept = [m for m in acc.values() if not m.coeff.is_zero()]
        kept.sort(key=ScalarMonomial.atom_key)
        return ScalarPoly(tuple(kept))

    def __mul__(self, other: "ScalarPoly") -> "ScalarPoly":
        out = ScalarPoly(())
        for m1 in self.monomials:
            for m2 in other.monomials:
                atoms = tuple(sorted(m1.atoms + m2.atoms, key=AtomRef.key))
                out = out + ScalarPoly(
                    (ScalarMonomial(m1.coeff * m2.coeff, atoms),))
        return out

    def conjugate(self) -> "ScalarPoly":
        mons = []
        for m in self.monomials:
            atoms = tuple(sorted(
                (AtomRef(a.base, not a.conjugated) for a in m.atoms),
                key=AtomRef.key))
            mons.append(ScalarMonomial(m.coeff.conjugate(), atoms))
        mons.sort(key=ScalarMonomial.atom_key)
        return ScalarPoly(tuple(mons))

    def is_zero(self) -> bool:
        return not self.monomials


def poly_of(t: Term) -> ScalarPoly:
    """Flatten a scalar-sorted ground term into its polynomial."""
    if isinstance(t, NumericScalar):
        return ScalarPoly.constant(t.value)
    if isinstance(t, ScalarAtom):
        return ScalarPoly.atom(t)
    if isinstance(t, App):
        if t.symbol == "ip":
            return ScalarPoly.atom(t)
        if t.symbol == "conjugate":
            return poly_of(t.args[0]).conjugate()
        if t.symbol == "plusS":
            return poly_of(t.args[0]) + poly_of(t.args[1])
        if t.symbol == "timesS":
            return poly_of(t.args[0]) * poly_of(t.args[1])
    raise SortError(f"not a scalar term: {t!r}")


def _monomial_term(m: ScalarMonomial) -> Term:
    if not m.atoms:
        return num(m.coeff)
    prod: Term = m.atoms[-1].to_term()
    for a in reversed(m.atoms[:-1]):
        prod = times_s(a.to_term(), prod)
    if m.coeff.is_one():
        return prod
    return times_s(num(m.coeff), prod)


def poly_term(p: ScalarPoly) -> Term:
    """Re-encode a polynomial as a right-nested plusS/timesS term."""
    if not p.monomials:
        return num(ZERO)
    out: Term = _monomial_term(p.monomials[-1])
    for m in reversed(p.monomials[:-1]):
        out = plus_s(_monomial_term(m), out)
    return out


def normalize_scalar(t: Term) -> Term:
    """Canonical form of a scalar-sorted ground term; idempotent."""
    if not isinstance(sort_of(t), ScalarSort):
        raise SortError(f"normalize_scalar needs a scalar term, got {sort_of(t)}")
    return poly_term(poly_of(t))


def scalar_equal(s1: Term, s2: Term) -> bool:
    return normalize_scalar(s1) == normalize_scalar(s2)
