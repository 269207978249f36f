"""Spaces, sorts, and the many-sorted term language.

A term is a variable (patterns only), a constant, or a signature symbol
applied to argument terms.  Sorts are ``scalar``, ``vector[S]`` or
``operator[S]`` where S is a multiset of Hilbert-space labels; the multiset
join makes the sorts respect the semigroup structure of the tensor product.
All values here are immutable and freely shareable between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

from .coefficient import Coefficient
from .errors import InvalidPosition, SortError

Position = tuple[int, ...]
ROOT: Position = ()


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Space:
    """A multiset of space labels, plus metavariables inside rule patterns.

    Ground spaces have only ``labels``; a pattern space may mention
    metavariables (e.g. the qubit space a Hadamard rule ranges over).
    Both components are kept sorted so equal multisets compare equal.
    """

    labels: tuple[str, ...] = ()
    metavars: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.labels and not self.metavars:
            raise ValueError("a Space must mention at least one label or metavariable")
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))
        object.__setattr__(self, "metavars", tuple(sorted(self.metavars)))

    @staticmethod
    def of(*labels: str) -> "Space":
        return Space(labels=tuple(labels))

    @staticmethod
    def var(name: str) -> "Space":
        return Space(metavars=(name,))

    @property
    def is_concrete(self) -> bool:
        return not self.metavars

    @property
    def is_atomic(self) -> bool:
        return len(self.labels) + len(self.metavars) == 1

    def join(self, other: "Space") -> "Space":
        return Space(self.labels + other.labels, self.metavars + other.metavars)

    def __str__(self) -> str:
        return "*".join(self.labels + tuple("?" + v for v in self.metavars))


def tensor_space(s1: Space, s2: Space) -> Space:
    """Sorted multiset union of two spaces; commutative and associative."""
    return s1.join(s2)


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

class Sort:
    """Base class: ScalarSort, VectorSort or OperatorSort."""

    __slots__ = ()


@dataclass(frozen=True)
class ScalarSort(Sort):
    def __str__(self) -> str:
        return "scalar"


@dataclass(frozen=True)
class VectorSort(Sort):
    space: Space

    def __str__(self) -> str:
        return f"vector[{self.space}]"


@dataclass(frozen=True)
class OperatorSort(Sort):
    space: Space

    def __str__(self) -> str:
        return f"operator[{self.space}]"


SCALAR = ScalarSort()


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FunctionSymbol:
    """A signature symbol: argument sort kinds and result kind.

    The space constraints (equal spaces for plus/ip/apply, multiset join
    for the tensors) are enforced by :func:`sort_of`.
    """

    name: str
    arg_kinds: tuple[str, ...]   # each of "s", "v", "o"
    result_kind: str


SIGNATURE: dict[str, FunctionSymbol] = {
    sym.name: sym for sym in [
        FunctionSymbol("conjugate", ("s",), "s"),
        FunctionSymbol("plusS", ("s", "s"), "s"),
        FunctionSymbol("timesS", ("s", "s"), "s"),
        FunctionSymbol("plusV", ("v", "v"), "v"),
        FunctionSymbol("timesV", ("s", "v"), "v"),
        FunctionSymbol("plusO", ("o", "o"), "o"),
        FunctionSymbol("timesO", ("s", "o"), "o"),
        FunctionSymbol("ip", ("v", "v"), "s"),
        FunctionSymbol("apply", ("o", "v"), "v"),
        FunctionSymbol("compose", ("o", "o"), "o"),
        FunctionSymbol("projector", ("v", "v"), "o"),
        FunctionSymbol("tensorV", ("v", "v"), "v"),
        FunctionSymbol("tensorO", ("o", "o"), "o"),
    ]
}


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    """A sorted pattern variable; never occurs in ground terms."""

    name: str
    sort: Sort


@dataclass(frozen=True)
class ScalarAtom(Term):
    """A symbolic scalar constant such as alpha or beta."""

    name: str


@dataclass(frozen=True)
class NumericScalar(Term):
    value: Coefficient


@dataclass(frozen=True)
class ConstVector(Term):
    name: str
    space: Space
    basis_tag: Optional[str] = None

    def __post_init__(self):
        # The computational-basis kets spell plainly as 0 and 1.
        if self.name in ("0", "1") and self.basis_tag is None:
            object.__setattr__(self, "basis_tag", "computational")


@dataclass(frozen=True)
class ConstOperator(Term):
    """An operator constant.

    ``params`` is the written factor order of its space; for multi-space
    gates like CNOT the order is meaningful (control first), so it is part
    of the constant's identity.  Each entry is atomic: one label or one
    metavariable.  The constant's space is the multiset join of the params.
    """

    name: str
    params: tuple[Space, ...]

    def __post_init__(self):
        if not self.params:
            raise ValueError("operator constant needs at least one space")
        flat: list[Space] = []
        for p in self.params:
            if p.is_atomic:
                flat.append(p)
            else:
                # a compound entry carries no order of its own
                flat.extend(Space.of(lb) for lb in p.labels)
                flat.extend(Space.var(mv) for mv in p.metavars)
        object.__setattr__(self, "params", tuple(flat))

    @property
    def space(self) -> Space:
        out = self.params[0]
        for p in self.params[1:]:
            out = out.join(p)
        return out


@dataclass(frozen=True)
class App(Term):
    symbol: str
    args: tuple[Term, ...]

    def __post_init__(self):
        sym = SIGNATURE.get(self.symbol)
        if sym is None:
            raise ValueError(f"unknown function symbol {self.symbol!r}")
        if len(self.args) != len(sym.arg_kinds):
            raise ValueError(
                f"{self.symbol} takes {len(sym.arg_kinds)} arguments, "
                f"got {len(self.args)}")


# ---------------------------------------------------------------------------
# Sort inference
# ---------------------------------------------------------------------------

def _kind(sort: Sort) -> str:
    if isinstance(sort, ScalarSort):
        return "s"
    if isinstance(sort, VectorSort):
        return "v"
    return "o"


def _space_of(sort: Sort) -> Space:
    if isinstance(sort, VectorSort) or isinstance(sort, OperatorSort):
        return sort.space
    raise AssertionError("scalar sorts carry no space")


def sort_of(t: Term, position: Position = ROOT) -> Sort:
    """Infer a term's sort by structural recursion.

    Works on patterns too, in which case the returned sort may mention
    space metavariables.  Raises :class:`SortError` with the offending
    position when an arity or space constraint is violated.
    """
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, (ScalarAtom, NumericScalar)):
        return SCALAR
    if isinstance(t, ConstVector):
        return VectorSort(t.space)
    if isinstance(t, ConstOperator):
        return OperatorSort(t.space)
    if not isinstance(t, App):
        raise SortError(f"not a term: {t!r}", position)

    sym = SIGNATURE[t.symbol]
    arg_sorts = [sort_of(a, position + (i + 1,)) for i, a in enumerate(t.args)]
    for i, (want, got) in enumerate(zip(sym.arg_kinds, arg_sorts)):
        if _kind(got) != want:
            raise SortError(
                f"{t.symbol} argument {i + 1} must be "
                f"{'scalar' if want == 's' else 'a vector' if want == 'v' else 'an operator'}, "
                f"got {got}", position + (i + 1,))

    name = t.symbol
    if name in ("conjugate", "plusS", "timesS"):
        return SCALAR
    if name == "timesV":
        return arg_sorts[1]
    if name == "timesO":
        return arg_sorts[1]
    if name in ("plusV", "plusO"):
        sp1, sp2 = _space_of(arg_sorts[0]), _space_of(arg_sorts[1])
        if sp1 != sp2:
            raise SortError(
                f"{name} needs both arguments in the same space, "
                f"got {sp1} and {sp2}", position)
        return arg_sorts[0]
    if name == "ip":
        sp1, sp2 = _space_of(arg_sorts[0]), _space_of(arg_sorts[1])
        if sp1 != sp2:
            raise SortError(
                f"inner product across distinct spaces {sp1} and {sp2}", position)
        return SCALAR
    if name == "apply":
        sp1, sp2 = _space_of(arg_sorts[0]), _space_of(arg_sorts[1])
        if sp1 != sp2:
            raise SortError(
                f"operator on space {sp1} cannot act on vector in space {sp2}",
                position)
        return VectorSort(sp2)
    if name == "compose":
        sp1, sp2 = _space_of(arg_sorts[0]), _space_of(arg_sorts[1])
        if sp1 != sp2:
            raise SortError(
                f"compose needs operators on one space, got {sp1} and {sp2}",
                position)
        return arg_sorts[0]
    if name == "projector":
        sp1, sp2 = _space_of(arg_sorts[0]), _space_of(arg_sorts[1])
        if sp1 != sp2:
            raise SortError(
                f"projector vectors must share a space, got {sp1} and {sp2}",
                position)
        return OperatorSort(sp1)
    if name == "tensorV":
        return VectorSort(_space_of(arg_sorts[0]).join(_space_of(arg_sorts[1])))
    if name == "tensorO":
        return OperatorSort(_space_of(arg_sorts[0]).join(_space_of(arg_sorts[1])))
    raise AssertionError(f"unhandled symbol {name}")


def is_ground(t: Term) -> bool:
    if isinstance(t, Var):
        return False
    if isinstance(t, App):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, ConstVector):
        return t.space.is_concrete
    if isinstance(t, ConstOperator):
        return t.space.is_concrete
    return True


# ---------------------------------------------------------------------------
# Construction helpers (each checks well-sortedness)
# ---------------------------------------------------------------------------

def _checked(symbol: str, *args: Term) -> App:
    t = App(symbol, tuple(args))
    sort_of(t)
    return t


def conjugate(s: Term) -> App:
    return _checked("conjugate", s)


def plus_s(a: Term, b: Term) -> App:
    return _checked("plusS", a, b)


def times_s(a: Term, b: Term) -> App:
    return _checked("timesS", a, b)


def plus_v(a: Term, b: Term) -> App:
    return _checked("plusV", a, b)


def times_v(s: Term, v: Term) -> App:
    return _checked("timesV", s, v)


def plus_o(a: Term, b: Term) -> App:
    return _checked("plusO", a, b)


def times_o(s: Term, o: Term) -> App:
    return _checked("timesO", s, o)


def ip(a: Term, b: Term) -> App:
    return _checked("ip", a, b)


def apply(o: Term, v: Term) -> App:
    return _checked("apply", o, v)


def compose(a: Term, b: Term) -> App:
    return _checked("compose", a, b)


def projector(a: Term, b: Term) -> App:
    return _checked("projector", a, b)


def tensor_v(a: Term, b: Term) -> App:
    return _checked("tensorV", a, b)


def tensor_o(a: Term, b: Term) -> App:
    return _checked("tensorO", a, b)


def num(value: Union[int, Fraction, Coefficient]) -> NumericScalar:
    if isinstance(value, Coefficient):
        return NumericScalar(value)
    return NumericScalar(Coefficient.from_rational(value))


def atom(name: str) -> ScalarAtom:
    return ScalarAtom(name)


def const_v(name: str, space: Space | str, basis_tag: Optional[str] = None) -> ConstVector:
    if isinstance(space, str):
        space = Space.of(space)
    return ConstVector(name, space, basis_tag)


def const_o(name: str, *parts: Space | str) -> ConstOperator:
    spaces = tuple(Space.of(p) if isinstance(p, str) else p for p in parts)
    return ConstOperator(name, spaces)


def var_s(name: str) -> Var:
    return Var(name, SCALAR)


def var_v(name: str, space: Space) -> Var:
    return Var(name, VectorSort(space))


def var_o(name: str, space: Space) -> Var:
    return Var(name, OperatorSort(space))


# ---------------------------------------------------------------------------
# Positions
# ---------------------------------------------------------------------------

def subterm_at(t: Term, p: Position) -> Term:
    """The subterm reached by following the 1-based path ``p`` from the root."""
    cur = t
    for idx in p:
        if not isinstance(cur, App) or not 1 <= idx <= len(cur.args):
            raise InvalidPosition(p, type(cur).__name__)
        cur = cur.args[idx - 1]
    return cur


def replace_at(t: Term, p: Position, replacement: Term) -> Term:
    """A copy of ``t`` with the subterm at ``p`` replaced.

    The replacement must have the same sort as what it replaces, so every
    node above the hole stays well-sorted without re-checking.
    """
    old = subterm_at(t, p)
    if sort_of(old) != sort_of(replacement):
        raise SortError(
            f"replacement changes sort from {sort_of(old)} to {sort_of(replacement)}",
            p)

    def rebuild(cur: Term, path: Position) -> Term:
        if not path:
            return replacement
        assert isinstance(cur, App)
        idx = path[0] - 1
        new_args = list(cur.args)
        new_args[idx] = rebuild(cur.args[idx], path[1:])
        return App(cur.symbol, tuple(new_args))

    return rebuild(t, p)


def positions_of(t: Term) -> list[Position]:
    """Every valid position of ``t`` in preorder, root first."""
    out: list[Position] = []

    def walk(cur: Term, path: Position) -> None:
        out.append(path)
        if isinstance(cur, App):
            for i, a in enumerate(cur.args):
                walk(a, path + (i + 1,))

    walk(t, ROOT)
    return out


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(term_size(a) for a in t.args)
    return 1


def term_key(t: Term) -> tuple:
    """A total-order key on terms, used wherever a fixed canonical order
    is needed (scalar monomial atoms, tensor factors, summands)."""
    if isinstance(t, Var):
        return (0, t.name, str(t.sort))
    if isinstance(t, NumericScalar):
        v = t.value
        return (1, v.re_rat, v.re_sqrt2, v.im_rat, v.im_sqrt2)
    if isinstance(t, ScalarAtom):
        return (2, t.name)
    if isinstance(t, ConstVector):
        return (3, t.space.labels, t.space.metavars, t.name, t.basis_tag or "")
    if isinstance(t, ConstOperator):
        return (4, t.space.labels, t.space.metavars, t.name,
                tuple(str(p) for p in t.params))
    assert isinstance(t, App)
    return (5, t.symbol, tuple(term_key(a) for a in t.args))


def format_position(p: Position) -> str:
    return ".".join(str(i) for i in p) if p else "eps"


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("eps", "ε", ""):
        return ROOT
    try:
        parts = tuple(int(x) for x in text.split("."))
    except ValueError:
        raise InvalidPosition((), f"unreadable position {text!r}")
    if any(i < 1 for i in parts):
        raise InvalidPosition(parts, "indices are 1-based")
    return parts


def iter_subterms(t: Term) -> Iterator[tuple[Position, Term]]:
    """Preorder traversal yielding (position, subterm) pairs."""
    yield ROOT, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            for p, sub in iter_subterms(a):
                yield (i + 1,) + p, sub
