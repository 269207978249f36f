"""Rewrite rules: the builtin catalogue, user rules, matching, application.

Matching is purely structural (first-order, sorted): a variable binds a
subterm of its declared sort, and a space metavariable unifies with a
concrete space multiset.  There is no matching modulo associativity or
commutativity; the AC laws are ordinary rules in the catalogue.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .coefficient import MINUS_ONE, ONE, ONE_OVER_SQRT2, ZERO
from .errors import (
    DirectionNotAllowed, IllFormedRule, NoMatch, SortError, UnknownRule,
)
from .scalars import normalize_scalar
from .terms import (
    App, ConstOperator, ConstVector, NumericScalar, OperatorSort, Position,
    ScalarAtom, ScalarSort, Sort, Space, Term, Var, VectorSort, apply,
    compose, conjugate, ip, iter_subterms, num, plus_o, plus_s,
    plus_v, projector, replace_at, sort_of, subterm_at, tensor_o, tensor_v,
    times_o, times_s, times_v, var_o, var_s, var_v,
)

FORWARD = "fwd"
REVERSE = "rev"

SCALAR_NORMALIZE = "scalar.normalize"


@dataclass(frozen=True)
class Rule:
    """A named pair of patterns; bidirectional rules may be used both ways.

    ``atomic_metavars`` lists space metavariables that may only bind a
    single-label space (the qubit-gate rules restrict theirs this way).
    """

    rule_id: str
    lhs: Term
    rhs: Term
    bidirectional: bool = True
    atomic_metavars: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RewriteStep:
    rule_id: str
    direction: str  # FORWARD or REVERSE
    position: Position


@dataclass
class Match:
    term_bindings: dict[str, Term] = field(default_factory=dict)
    space_bindings: dict[str, Space] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

class _MatchState:
    __slots__ = ("terms", "spaces", "deferred", "atomic")

    def __init__(self, atomic: frozenset[str]):
        self.terms: dict[str, Term] = {}
        self.spaces: dict[str, Space] = {}
        self.deferred: list[tuple[Space, Space]] = []
        self.atomic = atomic

    def bind_space(self, mv: str, space: Space) -> bool:
        if not space.labels:
            return False
        if mv in self.atomic and len(space.labels) != 1:
            return False
        cur = self.spaces.get(mv)
        if cur is not None:
            return cur == space
        self.spaces[mv] = space
        return True


def _unify_space(st: _MatchState, pat: Space, ground: Space,
                 may_defer: bool) -> str:
    """Unify a pattern space (multiset of labels plus metavars) with a
    concrete one.  Returns "ok", "fail", or "defer" when more than one
    metavariable is still unbound."""
    need = Counter(ground.labels)
    have = Counter(pat.labels)
    unbound: list[str] = []
    for mv in pat.metavars:
        b = st.spaces.get(mv)
        if b is None:
            unbound.append(mv)
        else:
            have.update(b.labels)
    if have - need:
        return "fail"
    rem = need - have
    if not unbound:
        return "ok" if not rem else "fail"
    if len(unbound) == 1:
        rem_labels = tuple(rem.elements())
        if not rem_labels:
            return "fail"
        return "ok" if st.bind_space(unbound[0], Space(rem_labels)) else "fail"
    if may_defer:
        st.deferred.append((pat, ground))
        return "defer"
    return "fail"


def _match_params(st: _MatchState, pat_params: tuple[Space, ...],
                  ground_params: tuple[Space, ...]) -> bool:
    """Match an operator constant's ordered space parameters.

    Each pattern entry is atomic (one label or one metavariable); a
    metavariable may cover a contiguous run of ground entries, whose
    join it binds.  Runs longer than one must be label-sorted so that
    instantiating the binding reproduces the matched constant exactly.
    """
    glabels = [p.labels[0] for p in ground_params]

    def go(pi: int, gi: int) -> bool:
        if pi == len(pat_params):
            return gi == len(glabels)
        entry = pat_params[pi]
        if entry.labels:
            if gi < len(glabels) and glabels[gi] == entry.labels[0]:
                return go(pi + 1, gi + 1)
            return False
        mv = entry.metavars[0]
        bound = st.spaces.get(mv)
        if bound is not None:
            k = len(bound.labels)
            if gi + k <= len(glabels) and tuple(glabels[gi:gi + k]) == bound.labels:
                return go(pi + 1, gi + k)
            return False
        max_k = len(glabels) - gi - (len(pat_params) - pi - 1)
        if mv in st.atomic:
            max_k = min(max_k, 1)
        for k in range(1, max_k + 1):
            seg = tuple(glabels[gi:gi + k])
            if k > 1 and seg != tuple(sorted(seg)):
                continue
            if st.bind_space(mv, Space(seg)):
                if go(pi + 1, gi + k):
                    return True
                del st.spaces[mv]
        return False

    return go(0, 0)


def _match_term(st: _MatchState, pat: Term, t: Term) -> bool:
    if isinstance(pat, Var):
        prev = st.terms.get(pat.name)
        if prev is not None:
            return prev == t
        tsort = sort_of(t)
        psort = pat.sort
        if isinstance(psort, ScalarSort):
            ok = isinstance(tsort, ScalarSort)
        elif isinstance(psort, VectorSort):
            ok = isinstance(tsort, VectorSort) and \
                _unify_space(st, psort.space, tsort.space, True) != "fail"
        else:
            ok = isinstance(tsort, OperatorSort) and \
                _unify_space(st, psort.space, tsort.space, True) != "fail"
        if ok:
            st.terms[pat.name] = t
        return ok
    if isinstance(pat, NumericScalar):
        return pat == t
    if isinstance(pat, ScalarAtom):
        return pat == t
    if isinstance(pat, ConstVector):
        return (isinstance(t, ConstVector) and pat.name == t.name
                and pat.basis_tag == t.basis_tag
                and _unify_space(st, pat.space, t.space, True) != "fail")
    if isinstance(pat, ConstOperator):
        return (isinstance(t, ConstOperator) and pat.name == t.name
                and _match_params(st, pat.params, t.params))
    assert isinstance(pat, App)
    if not isinstance(t, App) or t.symbol != pat.symbol:
        return False
    return all(_match_term(st, p, a) for p, a in zip(pat.args, t.args))


def match(pattern: Term, term: Term,
          atomic_metavars: frozenset[str] = frozenset()) -> Optional[Match]:
    """Match ``pattern`` against the root of a ground, well-sorted term."""
    st = _MatchState(atomic_metavars)
    if not _match_term(st, pattern, term):
        return None
    # Resolve space constraints that had several unknowns at first sight.
    pending = st.deferred
    while pending:
        before = len(st.spaces)
        rest: list[tuple[Space, Space]] = []
        for pat_sp, ground_sp in pending:
            r = _unify_space(st, pat_sp, ground_sp, False)
            if r == "fail":
                # underdetermined constraints are retried once others bind
                if len(pat_sp.metavars) >= 2 and any(
                        mv not in st.spaces for mv in pat_sp.metavars):
                    rest.append((pat_sp, ground_sp))
                else:
                    return None
        if rest and len(st.spaces) == before:
            return None
        pending = rest
    return Match(st.terms, st.spaces)


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def _subst_space(sp: Space, m: Match) -> Space:
    if sp.is_concrete:
        return sp
    labels = list(sp.labels)
    for mv in sp.metavars:
        b = m.space_bindings.get(mv)
        if b is None:
            raise IllFormedRule(f"space metavariable ?{mv} left unbound")
        labels.extend(b.labels)
    return Space(tuple(labels))


def instantiate(pattern: Term, m: Match) -> Term:
    if isinstance(pattern, Var):
        t = m.term_bindings.get(pattern.name)
        if t is None:
            raise IllFormedRule(f"variable {pattern.name} left unbound")
        return t
    if isinstance(pattern, (NumericScalar, ScalarAtom)):
        return pattern
    if isinstance(pattern, ConstVector):
        return ConstVector(pattern.name, _subst_space(pattern.space, m),
                           pattern.basis_tag)
    if isinstance(pattern, ConstOperator):
        return ConstOperator(pattern.name,
                             tuple(_subst_space(p, m) for p in pattern.params))
    assert isinstance(pattern, App)
    return App(pattern.symbol, tuple(instantiate(a, m) for a in pattern.args))


# ---------------------------------------------------------------------------
# Rule well-formedness
# ---------------------------------------------------------------------------

def _collect_vars(t: Term, acc: dict[str, Sort]) -> None:
    if isinstance(t, Var):
        prev = acc.get(t.name)
        if prev is not None and prev != t.sort:
            raise IllFormedRule(
                f"variable {t.name} used at two sorts: {prev} and {t.sort}")
        acc[t.name] = t.sort
    elif isinstance(t, App):
        for a in t.args:
            _collect_vars(a, acc)


def _collect_metavars(t: Term, acc: set[str]) -> None:
    if isinstance(t, Var):
        if not isinstance(t.sort, ScalarSort):
            acc.update(t.sort.space.metavars)  # type: ignore[union-attr]
    elif isinstance(t, ConstVector):
        acc.update(t.space.metavars)
    elif isinstance(t, ConstOperator):
        for p in t.params:
            acc.update(p.metavars)
    elif isinstance(t, App):
        for a in t.args:
            _collect_metavars(a, acc)


def validate_rule(rule: Rule) -> None:
    """Raises IllFormedRule unless the rule is sort-preserving and closed."""
    lhs_vars: dict[str, Sort] = {}
    rhs_vars: dict[str, Sort] = {}
    _collect_vars(rule.lhs, lhs_vars)
    _collect_vars(rule.rhs, rhs_vars)
    for name, srt in rhs_vars.items():
        if name not in lhs_vars:
            raise IllFormedRule(
                f"rule {rule.rule_id}: right side mentions unbound variable {name}")
        if lhs_vars[name] != srt:
            raise IllFormedRule(
                f"rule {rule.rule_id}: variable {name} changes sort across sides")
    lhs_mvs: set[str] = set()
    rhs_mvs: set[str] = set()
    _collect_metavars(rule.lhs, lhs_mvs)
    _collect_metavars(rule.rhs, rhs_mvs)
    if rhs_mvs - lhs_mvs:
        raise IllFormedRule(
            f"rule {rule.rule_id}: unbound space metavariables "
            f"{sorted(rhs_mvs - lhs_mvs)} on the right side")
    try:
        ls, rs = sort_of(rule.lhs), sort_of(rule.rhs)
    except SortError as e:
        raise IllFormedRule(f"rule {rule.rule_id}: ill-sorted pattern: {e}") from e
    if ls != rs:
        raise IllFormedRule(
            f"rule {rule.rule_id}: sides have different sorts {ls} and {rs}")


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

class Registry:
    """An immutable collection of rules; shared freely across sessions."""

    def __init__(self, rules: Iterable[Rule]):
        self.rules: tuple[Rule, ...] = tuple(rules)
        self._by_id: dict[str, Rule] = {}
        for r in self.rules:
            if r.rule_id in self._by_id:
                raise IllFormedRule(f"duplicate rule id {r.rule_id}")
            self._by_id[r.rule_id] = r
        self._sorted = tuple(sorted(self.rules, key=lambda r: r.rule_id))
        # index fwd/rev patterns by head symbol for fast enumeration
        self._head: dict[tuple[str, str], list[tuple[Rule, str]]] = {}
        for r in self._sorted:
            self._head.setdefault(_head_of(r.lhs), []).append((r, FORWARD))
            if r.bidirectional:
                self._head.setdefault(_head_of(r.rhs), []).append((r, REVERSE))

    def __len__(self) -> int:
        return len(self.rules)

    def get(self, rule_id: str) -> Optional[Rule]:
        r = self._by_id.get(rule_id)
        if r is None:
            r = _SCALAR_LAYER.get(rule_id) or OPTIONAL_RULES.get(rule_id)
        return r

    def candidates(self, t: Term) -> list[tuple[Rule, str]]:
        # variable-headed patterns (if a user registers any) match any head
        exact = self._head.get(_head_of(t), [])
        anyhead = self._head.get(("var", ""), [])
        return exact + anyhead if anyhead else exact

    def extended(self, new_rules: Iterable[Rule]) -> "Registry":
        return Registry(self.rules + tuple(new_rules))


def _head_of(t: Term) -> tuple[str, str]:
    if isinstance(t, App):
        return ("app", t.symbol)
    if isinstance(t, ConstVector):
        return ("cv", t.name)
    if isinstance(t, ConstOperator):
        return ("co", t.name)
    if isinstance(t, ScalarAtom):
        return ("sa", t.name)
    if isinstance(t, NumericScalar):
        return ("num", "")
    return ("var", "")


def register_user_rules(registry: Registry, rules: Iterable[Rule]) -> Registry:
    rules = tuple(rules)
    for r in rules:
        validate_rule(r)
    return registry.extended(rules)


# ---------------------------------------------------------------------------
# Builtin catalogue
# ---------------------------------------------------------------------------

def _builtin_rules() -> list[Rule]:
    s = Space.var("s")
    s1, s2, s3 = Space.var("s1"), Space.var("s2"), Space.var("s3")
    a, a1, a2 = var_s("a"), var_s("a1"), var_s("a2")

    def V(n, sp=s):
        return var_v(n, sp)

    def O(n, sp=s):
        return var_o(n, sp)

    v, v1, v2, v3, v4 = V("v"), V("v1"), V("v2"), V("v3"), V("v4")
    o, o1, o2, o3 = O("o"), O("o1"), O("o2"), O("o3")

    rules = [
        # linear combinations of vectors
        Rule("expandRightV", times_v(a, plus_v(v1, v2)),
             plus_v(times_v(a, v1), times_v(a, v2))),
        Rule("expandLeftV", times_v(plus_s(a1, a2), v),
             plus_v(times_v(a1, v), times_v(a2, v))),
        Rule("multiplyLeftV", times_v(a1, times_v(a2, v)),
             times_v(times_s(a1, a2), v)),
        # linear combinations of operators
        Rule("expandRightO", times_o(a, plus_o(o1, o2)),
             plus_o(times_o(a, o1), times_o(a, o2))),
        Rule("expandLeftO", times_o(plus_s(a1, a2), o),
             plus_o(times_o(a1, o), times_o(a2, o))),
        Rule("multiplyLeftO", times_o(a1, times_o(a2, o)),
             times_o(times_s(a1, a2), o)),
        # sesquilinearity of the inner product
        Rule("expandRightIP", ip(v1, plus_v(v2, v3)),
             plus_s(ip(v1, v2), ip(v1, v3))),
        Rule("expandLeftIP", ip(plus_v(v1, v2), v3),
             plus_s(ip(v1, v3), ip(v2, v3))),
        Rule("multiplyRightIP", ip(v1, times_v(a, v2)),
             times_s(a, ip(v1, v2))),
        Rule("multiplyLeftIP", ip(times_v(a, v1), v2),
             times_s(conjugate(a), ip(v1, v2))),
        # bilinearity of operator application, composite action
        Rule("expandRightApply", apply(o, plus_v(v1, v2)),
             plus_v(apply(o, v1), apply(o, v2))),
        Rule("multiplyRightApply", apply(o, times_v(a, v)),
             times_v(a, apply(o, v))),
        Rule("expandLeftApply", apply(plus_o(o1, o2), v),
             plus_v(apply(o1, v), apply(o2, v))),
        Rule("multiplyLeftApply", apply(times_o(a, o), v),
             times_v(a, apply(o, v))),
        Rule("expandCompose", apply(compose(o1, o2), v),
             apply(o1, apply(o2, v))),
        # projection operators
        Rule("applyProjector", apply(projector(v1, v2), v3),
             times_v(ip(v2, v3), v1)),
        # associativity/commutativity of the additions
        Rule("commuteV", plus_v(v1, v2), plus_v(v2, v1)),
        Rule("assocV", plus_v(v1, plus_v(v2, v3)),
             plus_v(plus_v(v1, v2), v3)),
        Rule("commuteO", plus_o(o1, o2), plus_o(o2, o1)),
        Rule("assocO", plus_o(o1, plus_o(o2, o3)),
             plus_o(plus_o(o1, o2), o3)),
    ]

    # tensor products: linearity in both arguments, for vectors ...
    w1, w2, w3 = V("v1", s1), V("v2", s2), V("v3", s2)
    rules += [
        Rule("expandRightTV", tensor_v(w1, plus_v(w2, w3)),
             plus_v(tensor_v(w1, w2), tensor_v(w1, w3))),
        Rule("expandLeftTV", tensor_v(plus_v(V("v1", s1), V("v2", s1)), V("v3", s2)),
             plus_v(tensor_v(V("v1", s1), V("v3", s2)),
                    tensor_v(V("v2", s1), V("v3", s2)))),
        Rule("multiplyLeftTV", tensor_v(times_v(a, V("v1", s1)), V("v2", s2)),
             times_v(a, tensor_v(V("v1", s1), V("v2", s2)))),
        Rule("multiplyRightTV", tensor_v(V("v1", s1), times_v(a, V("v2", s2))),
             times_v(a, tensor_v(V("v1", s1), V("v2", s2)))),
    ]
    # ... and for operators
    p1, p2, p3 = O("o1", s1), O("o2", s2), O("o3", s2)
    rules += [
        Rule("expandRightTO", tensor_o(p1, plus_o(p2, p3)),
             plus_o(tensor_o(p1, p2), tensor_o(p1, p3))),
        Rule("expandLeftTO", tensor_o(plus_o(O("o1", s1), O("o2", s1)), O("o3", s2)),
             plus_o(tensor_o(O("o1", s1), O("o3", s2)),
                    tensor_o(O("o2", s1), O("o3", s2)))),
        Rule("multiplyLeftTO", tensor_o(times_o(a, O("o1", s1)), O("o2", s2)),
             times_o(a, tensor_o(O("o1", s1), O("o2", s2)))),
        Rule("multiplyRightTO", tensor_o(O("o1", s1), times_o(a, O("o2", s2))),
             times_o(a, tensor_o(O("o1", s1), O("o2", s2)))),
    ]
    # tensor AC, factored inner products, factored operator action
    rules += [
        Rule("commuteTV", tensor_v(V("v1", s1), V("v2", s2)),
             tensor_v(V("v2", s2), V("v1", s1))),
        Rule("assocTV", tensor_v(V("v1", s1), tensor_v(V("v2", s2), V("v3", s3))),
             tensor_v(tensor_v(V("v1", s1), V("v2", s2)), V("v3", s3))),
        Rule("commuteTO", tensor_o(O("o1", s1), O("o2", s2)),
             tensor_o(O("o2", s2), O("o1", s1))),
        Rule("assocTO", tensor_o(O("o1", s1), tensor_o(O("o2", s2), O("o3", s3))),
             tensor_o(tensor_o(O("o1", s1), O("o2", s2)), O("o3", s3))),
        Rule("tensor.ip",
             ip(tensor_v(V("v1", s1), V("v2", s2)),
                tensor_v(V("v3", s1), V("v4", s2))),
             times_s(ip(V("v1", s1), V("v3", s1)), ip(V("v2", s2), V("v4", s2)))),
        Rule("tensor.apply",
             apply(tensor_o(O("o1", s1), O("o2", s2)),
                   tensor_v(V("v1", s1), V("v2", s2))),
             tensor_v(apply(O("o1", s1), V("v1", s1)),
                      apply(O("o2", s2), V("v2", s2)))),
    ]
    return rules


def builtin_registry() -> Registry:
    reg = Registry(_builtin_rules())
    for r in reg.rules:
        validate_rule(r)
    return reg


# ---------------------------------------------------------------------------
# Shipped user rules: qubit gates in the computational basis
# ---------------------------------------------------------------------------

def _ket(name: str, sp: Space) -> ConstVector:
    return ConstVector(name, sp, "computational")


def shipped_user_rules() -> list[Rule]:
    s = Space.var("s")
    s1, s2 = Space.var("s1"), Space.var("s2")
    h = ConstOperator("h", (s,))
    c = ConstOperator("c", (s1, s2))
    ident = ConstOperator("id", (s,))
    k0, k1 = _ket("0", s), _ket("1", s)
    k0a, k1a = _ket("0", s1), _ket("1", s1)
    k0b, k1b = _ket("0", s2), _ket("1", s2)
    half = num(ONE_OVER_SQRT2)

    def oneway(rid, lhs, rhs, atomics):
        return Rule(rid, lhs, rhs, bidirectional=False,
                    atomic_metavars=frozenset(atomics))

    return [
        oneway("user.hadamard0", apply(h, k0),
               times_v(half, plus_v(k0, k1)), {"s"}),
        oneway("user.hadamard1", apply(h, k1),
               times_v(half, plus_v(k0, times_v(num(MINUS_ONE), k1))), {"s"}),
        oneway("user.cnot00", apply(c, tensor_v(k0a, k0b)),
               tensor_v(k0a, k0b), {"s1", "s2"}),
        oneway("user.cnot01", apply(c, tensor_v(k0a, k1b)),
               tensor_v(k0a, k1b), {"s1", "s2"}),
        oneway("user.cnot10", apply(c, tensor_v(k1a, k0b)),
               tensor_v(k1a, k1b), {"s1", "s2"}),
        oneway("user.cnot11", apply(c, tensor_v(k1a, k1b)),
               tensor_v(k1a, k0b), {"s1", "s2"}),
        oneway("user.identity", apply(ident, var_v("v", s)),
               var_v("v", s), set()),
    ]


def conjugate_ip_rule() -> Rule:
    """Optional: conjugate symmetry of the inner product, off by default."""
    s = Space.var("s")
    v1, v2 = var_v("v1", s), var_v("v2", s)
    return Rule("conjugateIP", conjugate(ip(v1, v2)), ip(v2, v1))


def default_registry() -> Registry:
    """Builtin catalogue plus the shipped qubit rules."""
    return register_user_rules(builtin_registry(), shipped_user_rules())


# opt-in rules: resolvable by id everywhere, enumerated only if registered
OPTIONAL_RULES: dict[str, Rule] = {"conjugateIP": conjugate_ip_rule()}


# ---------------------------------------------------------------------------
# Scalar bookkeeping layer
# ---------------------------------------------------------------------------
# The pure-scalar rules are assumed built in rather than part of the
# catalogue.  Derivations still need them spelled out to stay replayable,
# so they exist as engine-internal rules: they resolve by id through any
# registry but are not enumerated, counted, or listed as moves.

def _scalar_layer() -> dict[str, Rule]:
    s = Space.var("s")
    v1, v2 = var_v("v1", s), var_v("v2", s)
    o1, o2 = var_o("o1", s), var_o("o2", s)
    return {r.rule_id: r for r in [
        Rule("scalar.timesOneV", times_v(num(ONE), v1), v1),
        Rule("scalar.timesOneO", times_o(num(ONE), o1), o1),
        Rule("scalar.dropZeroV", plus_v(times_v(num(ZERO), v1), v2), v2,
             bidirectional=False),
        Rule("scalar.dropZeroO", plus_o(times_o(num(ZERO), o1), o2), o2,
             bidirectional=False),
    ]}


_SCALAR_LAYER = _scalar_layer()


# ---------------------------------------------------------------------------
# Application and enumeration
# ---------------------------------------------------------------------------

def apply_rule(t: Term, step: RewriteStep, registry: Registry) -> Term:
    """Apply one rule at one position; raises if it does not fit."""
    if step.rule_id == SCALAR_NORMALIZE:
        sub = subterm_at(t, step.position)
        if not isinstance(sort_of(sub), ScalarSort):
            raise NoMatch(step.rule_id, step.position)
        return replace_at(t, step.position, normalize_scalar(sub))
    rule = registry.get(step.rule_id)
    if rule is None:
        raise UnknownRule(step.rule_id)
    if step.direction == REVERSE:
        if not rule.bidirectional:
            raise DirectionNotAllowed(rule.rule_id)
        src, dst = rule.rhs, rule.lhs
    else:
        src, dst = rule.lhs, rule.rhs
    sub = subterm_at(t, step.position)
    m = match(src, sub, rule.atomic_metavars)
    if m is None:
        raise NoMatch(rule.rule_id, step.position)
    return replace_at(t, step.position, instantiate(dst, m))


def applicable_at(t: Term, position: Position,
                  registry: Registry) -> list[RewriteStep]:
    """All (rule, direction) pairs that match the subterm at ``position``,
    ordered by rule id then direction (forward first)."""
    sub = subterm_at(t, position)
    out: list[RewriteStep] = []
    for rule, direction in registry.candidates(sub):
        pat = rule.lhs if direction == FORWARD else rule.rhs
        if match(pat, sub, rule.atomic_metavars) is not None:
            out.append(RewriteStep(rule.rule_id, direction, position))
    out.sort(key=lambda st: (st.rule_id, st.direction != FORWARD))
    return out


def applicable(t: Term, registry: Registry) -> list[RewriteStep]:
    """Every applicable step, in deterministic order: position preorder,
    then rule id, then forward before reverse."""
    out: list[RewriteStep] = []
    for pos, _sub in iter_subterms(t):
        out.extend(applicable_at(t, pos, registry))
    return out
