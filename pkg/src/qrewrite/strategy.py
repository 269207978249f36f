"""Normalization strategy, derivation recording and replay.

``normalize`` drives a term to a canonical form in oriented phases:

1. composite operators are unfolded (``expandCompose``);
2. every linearity rule is applied forward until the term is a sum of
   scalar-multiplied monomials (pluses pushed out, scalars pulled out,
   inner products and operator applications distributed);
3. projectors and the registered operator rules fire, reassociating and
   commuting tensor factors first where their factorization does not
   line up with the operator's;
4. phases 2-3 repeat until nothing changes;
5. the result is AC-canonicalized: plus and tensor chains are flattened
   to right combs, tensor factors are ordered by ascending space label,
   summands are ordered by the canonical text of their monomial, equal
   monomials merge their scalar coefficients, zero summands are dropped
   and unit coefficients stripped.

Every elementary change is recorded as a rewrite step, so the returned
derivation replays from the initial term to the final term exactly.
The AC moves are recorded as explicit commute/assoc rule applications;
scalar arithmetic is recorded through the engine's scalar bookkeeping
ids (``scalar.normalize`` and friends).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NoMatch, QRewriteError, ReplayError, SortError, StepLimitExceeded
from .rules import (
    FORWARD, REVERSE, Registry, RewriteStep, SCALAR_NORMALIZE, apply_rule,
)
from .scalars import normalize_scalar
from .syntax import render_canonical
from .terms import (
    App, ConstOperator, NumericScalar, OperatorSort, Position, ROOT,
    ScalarSort, Space, Term, VectorSort, sort_of, subterm_at,
)

BUILTIN_IDS = frozenset({
    "expandRightV", "expandLeftV", "multiplyLeftV",
    "expandRightO", "expandLeftO", "multiplyLeftO",
    "expandRightIP", "expandLeftIP", "multiplyRightIP", "multiplyLeftIP",
    "expandRightApply", "multiplyRightApply", "expandLeftApply",
    "multiplyLeftApply", "expandCompose", "applyProjector",
    "commuteV", "assocV", "commuteO", "assocO",
    "expandRightTV", "expandLeftTV", "multiplyLeftTV", "multiplyRightTV",
    "expandRightTO", "expandLeftTO", "multiplyLeftTO", "multiplyRightTO",
    "commuteTV", "assocTV", "commuteTO", "assocTO",
    "tensor.ip", "tensor.apply",
})

# forward orientation of the builtin rules during expansion, by head symbol
_EXPANSION: dict[str, tuple[str, ...]] = {
    "apply": ("expandCompose", "expandLeftApply", "multiplyLeftApply",
              "expandRightApply", "multiplyRightApply", "applyProjector",
              "tensor.apply"),
    "timesV": ("multiplyLeftV", "expandRightV"),
    "timesO": ("multiplyLeftO", "expandRightO"),
    "tensorV": ("expandLeftTV", "expandRightTV", "multiplyLeftTV",
                "multiplyRightTV"),
    "tensorO": ("expandLeftTO", "expandRightTO", "multiplyLeftTO",
                "multiplyRightTO"),
    "ip": ("expandLeftIP", "expandRightIP", "multiplyLeftIP",
           "multiplyRightIP", "tensor.ip"),
}


@dataclass
class Derivation:
    initial: Term
    steps: list[RewriteStep]
    final: Term


@dataclass(frozen=True)
class NormalizeConfig:
    max_steps: int = 10000
    apply_user_rules: bool = True
    optional_rules: frozenset[str] = frozenset()


def replay(initial: Term, steps: list[RewriteStep], registry: Registry) -> Term:
    """Apply recorded steps in order; fails atomically with the step index."""
    t = initial
    for i, step in enumerate(steps):
        try:
            t = apply_rule(t, step, registry)
        except QRewriteError as e:
            raise ReplayError(i, e) from e
    return t


class _Rewriter:
    """Holds the current term and records every applied step."""

    def __init__(self, term: Term, registry: Registry, max_steps: int):
        self.current = term
        self.registry = registry
        self.max_steps = max_steps
        self.steps: list[RewriteStep] = []

    def at(self, pos: Position) -> Term:
        return subterm_at(self.current, pos)

    def apply(self, rule_id: str, direction: str, pos: Position) -> None:
        if len(self.steps) >= self.max_steps:
            raise StepLimitExceeded(self.max_steps)
        step = RewriteStep(rule_id, direction, pos)
        self.current = apply_rule(self.current, step, self.registry)
        self.steps.append(step)

    def try_apply(self, rule_id: str, direction: str, pos: Position) -> bool:
        try:
            self.apply(rule_id, direction, pos)
            return True
        except NoMatch:
            return False

    def graft(self, other: "_Rewriter", offset: Position) -> None:
        """Replay steps recorded on a subterm rewriter at ``offset``."""
        for step in other.steps:
            self.apply(step.rule_id, step.direction, offset + step.position)


# ---------------------------------------------------------------------------
# Phase 1-4: expansion and operator application
# ---------------------------------------------------------------------------

def _user_rule_ids(registry: Registry, config: NormalizeConfig) -> tuple[str, ...]:
    if not config.apply_user_rules:
        return ()
    return tuple(r.rule_id for r in registry.rules
                 if r.rule_id not in BUILTIN_IDS)


def _expansion_candidates(registry: Registry,
                          config: NormalizeConfig) -> dict[str, tuple[str, ...]]:
    table = {k: v for k, v in _EXPANSION.items()}
    for rid in _user_rule_ids(registry, config) + tuple(sorted(config.optional_rules)):
        rule = registry.get(rid)
        if rule is None:
            continue
        head = rule.lhs
        if isinstance(head, App):
            table[head.symbol] = table.get(head.symbol, ()) + (rid,)
    return table


def _expand(rw: _Rewriter, pos: Position,
            table: dict[str, tuple[str, ...]]) -> bool:
    """Bottom-up application of the oriented expansion rules to fixpoint."""
    changed = False
    while True:
        t = rw.at(pos)
        if not isinstance(t, App):
            return changed
        for i in range(len(t.args)):
            if _expand(rw, pos + (i + 1,), table):
                changed = True
        t = rw.at(pos)
        if not isinstance(t, App):
            return changed
        fired = False
        for rid in table.get(t.symbol, ()):
            if rw.try_apply(rid, FORWARD, pos):
                fired = True
                break
        if not fired:
            return changed
        changed = True


# ---------------------------------------------------------------------------
# Tensor reshaping with recorded AC steps
# ---------------------------------------------------------------------------

_AC = {
    "tensorV": ("assocTV", "commuteTV"),
    "tensorO": ("assocTO", "commuteTO"),
    "plusV": ("assocV", "commuteV"),
    "plusO": ("assocO", "commuteO"),
}


def _comb(rw: _Rewriter, pos: Position, symbol: str) -> None:
    """Rotate a chain of ``symbol`` nodes into a right comb."""
    assoc, _ = _AC[symbol]
    p = pos
    while True:
        t = rw.at(p)
        if not (isinstance(t, App) and t.symbol == symbol):
            return
        while isinstance(t.args[0], App) and t.args[0].symbol == symbol:
            rw.apply(assoc, REVERSE, p)
            t = rw.at(p)
        p = p + (2,)


def _comb_slots(rw: _Rewriter, pos: Position, symbol: str) -> list[Position]:
    """Positions of the elements of a right comb (the comb must exist)."""
    slots: list[Position] = []
    p = pos
    while True:
        t = rw.at(p)
        if isinstance(t, App) and t.symbol == symbol:
            slots.append(p + (1,))
            p = p + (2,)
        else:
            slots.append(p)
            return slots


def _swap_adjacent(rw: _Rewriter, pos: Position, symbol: str,
                   slot: int, n: int) -> None:
    """Swap comb elements ``slot`` and ``slot+1`` with explicit AC steps."""
    assoc, commute = _AC[symbol]
    node = pos + (2,) * slot
    if slot == n - 2:
        rw.apply(commute, FORWARD, node)
    else:
        rw.apply(assoc, FORWARD, node)
        rw.apply(commute, FORWARD, node + (1,))
        rw.apply(assoc, REVERSE, node)


def _reorder(rw: _Rewriter, pos: Position, symbol: str,
             desired: list[int]) -> None:
    """Permute the comb at ``pos`` so element ``desired[i]`` lands in slot i."""
    n = len(desired)
    order = list(range(n))
    for target in range(n):
        j = order.index(desired[target])
        while j > target:
            _swap_adjacent(rw, pos, symbol, j - 1, n)
            order[j - 1], order[j] = order[j], order[j - 1]
            j -= 1


def _group_prefix(rw: _Rewriter, pos: Position, symbol: str, k: int) -> None:
    """Bind the first ``k`` comb elements into the left argument at ``pos``."""
    assoc, _ = _AC[symbol]
    for _ in range(k - 1):
        rw.apply(assoc, FORWARD, pos)


def _leaves(t: Term, symbol: str) -> list[Term]:
    out: list[Term] = []

    def walk(cur: Term) -> None:
        if isinstance(cur, App) and cur.symbol == symbol:
            walk(cur.args[0])
            walk(cur.args[1])
        else:
            out.append(cur)

    walk(t)
    return out


def _space_of(t: Term) -> Space:
    srt = sort_of(t)
    assert isinstance(srt, (VectorSort, OperatorSort))
    return srt.space


# ---------------------------------------------------------------------------
# Phase 3: aligning tensor factorizations so operators can act
# ---------------------------------------------------------------------------

def _partition_for(leaf_spaces: list[Space], target: Space) -> list[int] | None:
    """Indices of a sub-multiset of leaves jointly covering ``target``."""
    from collections import Counter
    want = Counter(target.labels)

    def go(i: int, want: "Counter[str]", picked: list[int]) -> list[int] | None:
        if not +want:
            return picked
        if i == len(leaf_spaces):
            return None
        have = Counter(leaf_spaces[i].labels)
        if not (have - want):
            r = go(i + 1, want - have, picked + [i])
            if r is not None:
                return r
        return go(i + 1, want, picked)

    return go(0, want, [])


def _fire_tensor_apply(rw: _Rewriter, pos: Position) -> bool:
    t = rw.at(pos)
    op = t.args[0]
    sa = _space_of(op.args[0])
    arg = t.args[1]
    if not (isinstance(arg, App) and arg.symbol == "tensorV"):
        return False
    leaf_terms = _leaves(arg, "tensorV")
    spaces = [_space_of(leaf) for leaf in leaf_terms]
    group = _partition_for(spaces, sa)
    if group is None or not group or len(group) == len(leaf_terms):
        return False
    rest = [i for i in range(len(leaf_terms)) if i not in group]
    # simulate on the subterm: only commit reshape steps that lead to a fire
    tmp = _Rewriter(t, rw.registry, rw.max_steps - len(rw.steps))
    _comb(tmp, (2,), "tensorV")
    _reorder(tmp, (2,), "tensorV", group + rest)
    _group_prefix(tmp, (2,), "tensorV", len(group))
    if not tmp.try_apply("tensor.apply", FORWARD, ()):
        return False
    rw.graft(tmp, pos)
    return True


def _fire_gate(rw: _Rewriter, pos: Position,
               user_ids: tuple[str, ...]) -> bool:
    t = rw.at(pos)
    gate = t.args[0]
    arg = t.args[1]
    if not (isinstance(arg, App) and arg.symbol == "tensorV"):
        return False
    leaf_terms = _leaves(arg, "tensorV")
    spaces = [_space_of(leaf) for leaf in leaf_terms]
    desired: list[int] = []
    used: set[int] = set()
    for param in gate.params:
        found = None
        for i, sp in enumerate(spaces):
            if i not in used and sp == param:
                found = i
                break
        if found is None:
            return False
        used.add(found)
        desired.append(found)
    if len(desired) != len(leaf_terms):
        return False
    tmp = _Rewriter(t, rw.registry, rw.max_steps - len(rw.steps))
    _comb(tmp, (2,), "tensorV")
    _reorder(tmp, (2,), "tensorV", desired)
    if not any(tmp.try_apply(rid, FORWARD, ()) for rid in user_ids):
        return False
    rw.graft(tmp, pos)
    return True


def _fire_tensor_ip(rw: _Rewriter, pos: Position) -> bool:
    t = rw.at(pos)
    left, right = t.args
    if not all(isinstance(x, App) and x.symbol == "tensorV"
               for x in (left, right)):
        return False
    lv = _leaves(left, "tensorV")
    rv = _leaves(right, "tensorV")
    if len(lv) != len(rv) or len(lv) < 2:
        return False
    lsp = [_space_of(x) for x in lv]
    rsp = [_space_of(x) for x in rv]
    lorder = sorted(range(len(lv)), key=lambda i: lsp[i].labels)
    rorder = sorted(range(len(rv)), key=lambda i: rsp[i].labels)
    if [lsp[i].labels for i in lorder] != [rsp[i].labels for i in rorder]:
        return False
    tmp = _Rewriter(t, rw.registry, rw.max_steps - len(rw.steps))
    _comb(tmp, (1,), "tensorV")
    _reorder(tmp, (1,), "tensorV", lorder)
    _comb(tmp, (2,), "tensorV")
    _reorder(tmp, (2,), "tensorV", rorder)
    if not tmp.try_apply("tensor.ip", FORWARD, ()):
        return False
    rw.graft(tmp, pos)
    return True


def _align_pass(rw: _Rewriter, config: NormalizeConfig) -> bool:
    """Fire one misaligned tensor application/ip per pass; False when done."""
    user_ids = _user_rule_ids(rw.registry, config)
    stack: list[Position] = [ROOT]
    while stack:
        pos = stack.pop()
        t = rw.at(pos)
        if not isinstance(t, App):
            continue
        if t.symbol == "apply":
            op = t.args[0]
            if isinstance(op, App) and op.symbol == "tensorO":
                if _fire_tensor_apply(rw, pos):
                    return True
            if isinstance(op, ConstOperator) and len(op.params) >= 2 and user_ids:
                if _fire_gate(rw, pos, user_ids):
                    return True
        elif t.symbol == "ip":
            if _fire_tensor_ip(rw, pos):
                return True
        for i in range(len(t.args)):
            stack.append(pos + (i + 1,))
    return False


# ---------------------------------------------------------------------------
# Phase 5: AC-canonical form
# ---------------------------------------------------------------------------

_SUM = {"v": ("plusV", "timesV", "expandLeftV", "scalar.timesOneV",
              "scalar.dropZeroV"),
        "o": ("plusO", "timesO", "expandLeftO", "scalar.timesOneO",
              "scalar.dropZeroO")}


def _is_num(t: Term, value: str) -> bool:
    if not isinstance(t, NumericScalar):
        return False
    return t.value.is_one() if value == "1" else t.value.is_zero()


def _canon(rw: _Rewriter, pos: Position) -> None:
    srt = sort_of(rw.at(pos))
    if isinstance(srt, ScalarSort):
        _canon_scalar(rw, pos)
    elif isinstance(srt, VectorSort):
        _canon_additive(rw, pos, "v")
    else:
        _canon_additive(rw, pos, "o")


def _canon_scalar(rw: _Rewriter, pos: Position) -> None:
    # canonicalize the vector arguments of inner products first, so the
    # opaque ip atoms are keyed by canonical text
    def ip_nodes(t: Term, p: Position) -> list[Position]:
        if not isinstance(t, App):
            return []
        if t.symbol == "ip":
            return [p]
        if t.symbol in ("plusS", "timesS", "conjugate"):
            out = []
            for i, a in enumerate(t.args):
                out.extend(ip_nodes(a, p + (i + 1,)))
            return out
        return []

    for q in ip_nodes(rw.at(pos), pos):
        _canon(rw, q + (1,))
        _canon(rw, q + (2,))
    sub = rw.at(pos)
    if normalize_scalar(sub) != sub:
        rw.apply(SCALAR_NORMALIZE, FORWARD, pos)


def _canon_monomial(rw: _Rewriter, pos: Position, kind: str) -> None:
    """Canonicalize a plus-free vector/operator term at ``pos``."""
    plus_sym, times_sym, _, times_one, _ = _SUM[kind]
    tensor_sym = "tensorV" if kind == "v" else "tensorO"
    t = rw.at(pos)
    if not isinstance(t, App):
        return
    if t.symbol == times_sym:
        _canon_scalar(rw, pos + (1,))
        _canon(rw, pos + (2,))
        if _is_num(rw.at(pos + (1,)), "1"):
            rw.apply(times_one, FORWARD, pos)
        return
    if t.symbol == tensor_sym:
        _comb(rw, pos, tensor_sym)
        slots = _comb_slots(rw, pos, tensor_sym)
        for s in slots:
            _canon(rw, s)
        keys = [(_space_of(rw.at(s)).labels, render_canonical(rw.at(s)))
                for s in slots]
        desired = sorted(range(len(keys)), key=lambda i: keys[i])
        _reorder(rw, pos, tensor_sym, desired)
        return
    # apply, compose, projector and friends: canonicalize children
    for i in range(len(t.args)):
        _canon(rw, pos + (i + 1,))


def _canon_additive(rw: _Rewriter, pos: Position, kind: str) -> None:
    plus_sym, times_sym, expand_left, times_one, drop_zero = _SUM[kind]
    t = rw.at(pos)
    if not (isinstance(t, App) and t.symbol == plus_sym):
        _canon_monomial(rw, pos, kind)
        return
    _comb(rw, pos, plus_sym)
    slots = _comb_slots(rw, pos, plus_sym)
    for s in slots:
        _canon_monomial(rw, s, kind)

    def monomial_key(term: Term) -> str:
        if isinstance(term, App) and term.symbol == times_sym:
            return render_canonical(term.args[1])
        return render_canonical(term)

    keys = [monomial_key(rw.at(s)) for s in slots]
    desired = sorted(range(len(keys)), key=lambda i: keys[i])
    _reorder(rw, pos, plus_sym, desired)

    # merge neighbouring summands with the same monomial
    while True:
        slots = _comb_slots(rw, pos, plus_sym)
        if len(slots) < 2:
            break
        keys = [monomial_key(rw.at(s)) for s in slots]
        dup = next((i for i in range(len(keys) - 1) if keys[i] == keys[i + 1]),
                   None)
        if dup is None:
            break
        n = len(slots)
        for s in (slots[dup], slots[dup + 1]):
            if not (isinstance(rw.at(s), App) and rw.at(s).symbol == times_sym):
                rw.apply(times_one, REVERSE, s)
        node = pos + (2,) * dup
        if dup == n - 2:
            rw.apply(expand_left, REVERSE, node)
            merged = node
        else:
            rw.apply(_AC[plus_sym][0], FORWARD, node)
            rw.apply(expand_left, REVERSE, node + (1,))
            merged = node + (1,)
        _canon_scalar(rw, merged + (1,))
        if _is_num(rw.at(merged + (1,)), "0"):
            if merged != node:
                # zero summand heads the comb node: plus(zero, rest) -> rest
                rw.apply(drop_zero, FORWARD, node)
            elif node != pos:
                # zero summand is the comb tail: rotate it to the front of its
                # parent plus node, then drop it
                parent = node[:-1]
                rw.apply(_AC[plus_sym][1], FORWARD, parent)
                rw.apply(drop_zero, FORWARD, parent)
            # else the whole sum collapsed to a lone zero summand: keep it

    # strip unit coefficients (unless a lone zero summand remains)
    slots = _comb_slots(rw, pos, plus_sym)
    for s in slots:
        t = rw.at(s)
        if isinstance(t, App) and t.symbol == times_sym and \
                _is_num(t.args[0], "1"):
            rw.apply(times_one, FORWARD, s)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def normalize(t: Term, registry: Registry,
              config: NormalizeConfig | None = None) -> tuple[Term, Derivation]:
    """Drive ``t`` to canonical form; returns the form and the derivation."""
    config = config or NormalizeConfig()
    rw = _Rewriter(t, registry, config.max_steps)
    table = _expansion_candidates(registry, config)
    while True:
        _expand(rw, ROOT, table)
        if not _align_pass(rw, config):
            break
    _canon(rw, ROOT)
    return rw.current, Derivation(t, rw.steps, rw.current)


def equivalent(t1: Term, t2: Term, registry: Registry,
               config: NormalizeConfig | None = None) -> bool:
    """Sound equality check: both terms normalize to the same canonical
    form.  A False result is not a proof of inequality."""
    s1, s2 = sort_of(t1), sort_of(t2)
    if s1 != s2:
        raise SortError(f"cannot compare terms of sorts {s1} and {s2}")
    n1, _ = normalize(t1, registry, config)
    n2, _ = normalize(t2, registry, config)
    return n1 == n2
