"""Finite-dimensional numerical oracle.

Ground terms are interpreted as concrete complex numbers, coordinate
vectors and matrices so that every rewrite rule can be checked
numerically: both sides of a sound rule must evaluate to the same value
under any assignment of the constants.

The one consequential convention: tensor factors are combined by
Kronecker product in ascending space-label order, regardless of the
syntactic order of the factors.  The tensor product here is declared
commutative (``commuteTV``/``commuteTO`` are rules), and only an
order-canonical interpretation makes those rules semantically sound.

The computational-basis kets |0> and |1> are always the first two
standard basis vectors, and the shipped gate constants (h, c, id) get
their defining matrices, extended by the identity on any extra basis
directions; this keeps the shipped qubit rules sound at any dimension.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .coefficient import Coefficient
from .errors import SortError, UnassignedConstant
from .rules import Match, Rule, instantiate
from .terms import (
    App, ConstOperator, ConstVector, NumericScalar, OperatorSort, ScalarAtom,
    ScalarSort, Sort, Space, Term, Var, VectorSort, apply, compose, conjugate,
    const_o, const_v, ip, num, plus_o, plus_s, plus_v, projector, sort_of,
    tensor_o, tensor_v, times_o, times_s, times_v,
)

RESERVED_OPERATORS = ("h", "c", "id")
DEFAULT_TOLERANCE = 1e-9


@dataclass
class ConcreteValue:
    kind: str                      # "scalar" | "vector" | "operator"
    value: complex | np.ndarray
    space: Optional[Space] = None  # for vectors and operators


@dataclass
class Model:
    """A finite-dimensional interpretation of every constant in scope."""

    dims: dict[str, int]
    vector_assign: dict[tuple, np.ndarray] = field(default_factory=dict)
    operator_assign: dict[tuple, np.ndarray] = field(default_factory=dict)
    scalar_assign: dict[str, complex] = field(default_factory=dict)
    seed: int = 0

    def dim_of(self, space: Space) -> int:
        d = 1
        for lb in space.labels:
            d *= self.dims[lb]
        return d


# ---------------------------------------------------------------------------
# Label-sorted Kronecker products
# ---------------------------------------------------------------------------

def _axis_dims(labels: Sequence[str], dims: dict[str, int]) -> list[int]:
    return [dims[lb] for lb in labels]


def _merge_order(la: Sequence[str], lb: Sequence[str]) -> list[int]:
    merged = list(la) + list(lb)
    return list(np.argsort(merged, kind="stable"))


def kron_vectors(a: np.ndarray, sa: Space, b: np.ndarray, sb: Space,
                 dims: dict[str, int]) -> np.ndarray:
    ta = a.reshape(_axis_dims(sa.labels, dims))
    tb = b.reshape(_axis_dims(sb.labels, dims))
    combined = np.multiply.outer(ta, tb)
    return combined.transpose(_merge_order(sa.labels, sb.labels)).reshape(-1)


def kron_operators(a: np.ndarray, sa: Space, b: np.ndarray, sb: Space,
                   dims: dict[str, int]) -> np.ndarray:
    da, db = _axis_dims(sa.labels, dims), _axis_dims(sb.labels, dims)
    na, nb = len(da), len(db)
    ta = a.reshape(da + da)
    tb = b.reshape(db + db)
    combined = np.multiply.outer(ta, tb)  # axes: rowsA colsA rowsB colsB
    order = _merge_order(sa.labels, sb.labels)
    row_axis = [i if i < na else 2 * na + (i - na) for i in order]
    col_axis = [na + i if i < na else 2 * na + nb + (i - na) for i in order]
    total = int(np.prod(da + db))
    return combined.transpose(row_axis + col_axis).reshape(total, total)


# ---------------------------------------------------------------------------
# Gate matrices
# ---------------------------------------------------------------------------

def _hadamard_extended(dim: int) -> np.ndarray:
    m = np.eye(dim, dtype=complex)
    r = 1 / np.sqrt(2)
    m[0, 0] = m[0, 1] = m[1, 0] = r
    m[1, 1] = -r
    return m


def _cnot_extended(control: str, target: str, dims: dict[str, int]) -> np.ndarray:
    l1, l2 = sorted((control, target))
    d1, d2 = dims[l1], dims[l2]
    m = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for i1 in range(d1):
        for i2 in range(d2):
            ic = i1 if control == l1 else i2
            it = i2 if control == l1 else i1
            if ic == 1 and it in (0, 1):
                it = 1 - it
            j1 = ic if control == l1 else it
            j2 = it if control == l1 else ic
            m[j1 * d2 + j2, i1 * d2 + i2] = 1
    return m


def _is_gate(t: ConstOperator) -> bool:
    return t.name in ("id", "h") or (t.name == "c" and len(t.params) == 2)


def _gate_matrix(t: ConstOperator, model: Model) -> Optional[np.ndarray]:
    if t.name == "id":
        return np.eye(model.dim_of(t.space), dtype=complex)
    if t.name == "h":
        return _hadamard_extended(model.dim_of(t.space))
    if t.name == "c" and len(t.params) == 2:
        return _cnot_extended(t.params[0].labels[0], t.params[1].labels[0],
                              model.dims)
    return None


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_term(t: Term, model: Model) -> ConcreteValue:
    """Interpret a ground term; structural recursion over the signature."""
    if isinstance(t, NumericScalar):
        return ConcreteValue("scalar", t.value.to_complex())
    if isinstance(t, ScalarAtom):
        if t.name not in model.scalar_assign:
            raise UnassignedConstant(f"scalar atom {t.name}")
        return ConcreteValue("scalar", model.scalar_assign[t.name])
    if isinstance(t, ConstVector):
        dim = model.dim_of(t.space)
        if t.basis_tag == "computational" and t.name in ("0", "1"):
            vec = np.zeros(dim, dtype=complex)
            vec[int(t.name)] = 1
            return ConcreteValue("vector", vec, t.space)
        key = (t.name, t.space.labels, t.basis_tag)
        if key not in model.vector_assign:
            raise UnassignedConstant(f"vector constant {t.name}@{t.space}")
        return ConcreteValue("vector", model.vector_assign[key], t.space)
    if isinstance(t, ConstOperator):
        gate = _gate_matrix(t, model)
        if gate is not None:
            return ConcreteValue("operator", gate, t.space)
        key = (t.name, t.space.labels)
        if key not in model.operator_assign:
            raise UnassignedConstant(f"operator constant {t.name}@{t.space}")
        return ConcreteValue("operator", model.operator_assign[key], t.space)
    if isinstance(t, Var):
        raise SortError("cannot evaluate a pattern variable")
    assert isinstance(t, App)
    sym = t.symbol
    args = [eval_term(a, model) for a in t.args]
    if sym == "conjugate":
        return ConcreteValue("scalar", np.conj(args[0].value))
    if sym == "plusS":
        return ConcreteValue("scalar", args[0].value + args[1].value)
    if sym == "timesS":
        return ConcreteValue("scalar", args[0].value * args[1].value)
    if sym in ("plusV", "plusO"):
        return ConcreteValue(args[0].kind, args[0].value + args[1].value,
                             args[0].space)
    if sym in ("timesV", "timesO"):
        return ConcreteValue(args[1].kind, args[0].value * args[1].value,
                             args[1].space)
    if sym == "ip":
        # conjugate-linear in the first argument
        return ConcreteValue("scalar", complex(np.vdot(args[0].value,
                                                       args[1].value)))
    if sym == "apply":
        return ConcreteValue("vector", args[0].value @ args[1].value,
                             args[1].space)
    if sym == "compose":
        return ConcreteValue("operator", args[0].value @ args[1].value,
                             args[0].space)
    if sym == "projector":
        return ConcreteValue("operator",
                             np.outer(args[0].value, np.conj(args[1].value)),
                             args[0].space)
    if sym == "tensorV":
        sa, sb = args[0].space, args[1].space
        return ConcreteValue(
            "vector",
            kron_vectors(args[0].value, sa, args[1].value, sb, model.dims),
            sa.join(sb))
    assert sym == "tensorO"
    sa, sb = args[0].space, args[1].space
    return ConcreteValue(
        "operator",
        kron_operators(args[0].value, sa, args[1].value, sb, model.dims),
        sa.join(sb))


def values_close(a: ConcreteValue, b: ConcreteValue,
                 tol: float = DEFAULT_TOLERANCE) -> bool:
    """Relative comparison with a +1 absolute floor in the denominator."""
    if a.kind != b.kind:
        return False
    if a.kind == "scalar":
        return abs(a.value - b.value) <= tol * (1 + max(abs(a.value),
                                                        abs(b.value)))
    if np.shape(a.value) != np.shape(b.value):
        return False
    na = float(np.linalg.norm(a.value))
    nb = float(np.linalg.norm(b.value))
    return float(np.linalg.norm(a.value - b.value)) <= tol * (1 + max(na, nb))


# ---------------------------------------------------------------------------
# Random models
# ---------------------------------------------------------------------------

def _collect(terms: Iterable[Term]):
    labels: set[str] = set()
    vectors: set[tuple] = set()
    operators: set[tuple] = set()
    scalars: set[str] = set()

    def walk(t: Term) -> None:
        if isinstance(t, ConstVector):
            labels.update(t.space.labels)
            if not (t.basis_tag == "computational" and t.name in ("0", "1")):
                vectors.add((t.name, t.space.labels, t.basis_tag))
        elif isinstance(t, ConstOperator):
            labels.update(t.space.labels)
            if not _is_gate(t):
                operators.add((t.name, t.space.labels))
        elif isinstance(t, ScalarAtom):
            scalars.add(t.name)
        elif isinstance(t, App):
            for a in t.args:
                walk(a)

    for t in terms:
        walk(t)
    return labels, vectors, operators, scalars


def _disc(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex samples uniform in the unit disc."""
    r = np.sqrt(rng.uniform(0, 1, shape))
    theta = rng.uniform(0, 2 * np.pi, shape)
    return r * np.exp(1j * theta)


def random_model(terms: Term | Iterable[Term], seed: int = 0,
                 dim_choices: Sequence[int] = (2, 3)) -> Model:
    """Deterministic-in-seed random assignment for every constant in scope."""
    if isinstance(terms, Term):
        terms = [terms]
    labels, vectors, operators, scalars = _collect(terms)
    rng = np.random.default_rng(seed)
    dims = {lb: int(rng.choice(dim_choices)) for lb in sorted(labels)}
    model = Model(dims=dims, seed=seed)
    for key in sorted(vectors, key=lambda k: (k[0], k[1], k[2] or "")):
        d = int(np.prod([dims[lb] for lb in key[1]]))
        model.vector_assign[key] = _disc(rng, d)
    for key in sorted(operators):
        d = int(np.prod([dims[lb] for lb in key[1]]))
        model.operator_assign[key] = _disc(rng, (d, d))
    for name in sorted(scalars):
        model.scalar_assign[name] = complex(_disc(rng, ()))
    return model


# ---------------------------------------------------------------------------
# Random ground terms
# ---------------------------------------------------------------------------

_VEC_NAMES = ("x", "y", "z", "u", "w", "psi", "phi", "chi")
_OP_NAMES = ("p", "q", "r", "m", "n")
_ATOM_NAMES = ("al", "be", "ga", "de")


def _random_space(rng: np.random.Generator, labels: Sequence[str]) -> Space:
    k = int(rng.integers(1, min(2, len(labels)) + 1))
    picked = rng.choice(len(labels), size=k, replace=False)
    return Space(tuple(labels[int(i)] for i in picked))


def _split_space(rng: np.random.Generator, space: Space) -> tuple[Space, Space]:
    labels = list(space.labels)
    order = rng.permutation(len(labels))
    k = int(rng.integers(1, len(labels)))
    left = [labels[int(i)] for i in order[:k]]
    right = [labels[int(i)] for i in order[k:]]
    return Space(tuple(left)), Space(tuple(right))


def random_ground_term(sort: Sort, rng: np.random.Generator,
                       depth: int = 3,
                       ambient_labels: Sequence[str] = ("x1", "x2")) -> Term:
    """A random well-sorted ground term of the requested sort."""
    def pick(names) -> str:
        return str(names[int(rng.integers(0, len(names)))])

    def scalar(d: int) -> Term:
        if d <= 0:
            return (ScalarAtom(pick(_ATOM_NAMES)) if rng.random() < 0.6
                    else _random_numeric(rng))
        c = rng.random()
        if c < 0.25:
            return plus_s(scalar(d - 1), scalar(d - 1))
        if c < 0.5:
            return times_s(scalar(d - 1), scalar(d - 1))
        if c < 0.65:
            return conjugate(scalar(d - 1))
        if c < 0.8:
            sp = _random_space(rng, ambient_labels)
            return ip(vector(d - 1, sp), vector(d - 1, sp))
        return scalar(0)

    def vector(d: int, sp: Space) -> Term:
        if d <= 0:
            return const_v(pick(_VEC_NAMES), sp)
        c = rng.random()
        if c < 0.25:
            return plus_v(vector(d - 1, sp), vector(d - 1, sp))
        if c < 0.45:
            return times_v(scalar(d - 1), vector(d - 1, sp))
        if c < 0.6:
            return apply(operator(d - 1, sp), vector(d - 1, sp))
        if c < 0.8 and len(sp.labels) >= 2:
            s1, s2 = _split_space(rng, sp)
            return tensor_v(vector(d - 1, s1), vector(d - 1, s2))
        return vector(0, sp)

    def operator(d: int, sp: Space) -> Term:
        if d <= 0:
            return const_o(pick(_OP_NAMES), *sp.labels)
        c = rng.random()
        if c < 0.2:
            return plus_o(operator(d - 1, sp), operator(d - 1, sp))
        if c < 0.4:
            return times_o(scalar(d - 1), operator(d - 1, sp))
        if c < 0.55:
            return compose(operator(d - 1, sp), operator(d - 1, sp))
        if c < 0.7:
            return projector(vector(d - 1, sp), vector(d - 1, sp))
        if c < 0.85 and len(sp.labels) >= 2:
            s1, s2 = _split_space(rng, sp)
            return tensor_o(operator(d - 1, s1), operator(d - 1, s2))
        return operator(0, sp)

    if isinstance(sort, ScalarSort):
        return scalar(depth)
    if isinstance(sort, VectorSort):
        return vector(depth, sort.space)
    assert isinstance(sort, OperatorSort)
    return operator(depth, sort.space)


def _random_numeric(rng: np.random.Generator) -> NumericScalar:
    choices = [
        Coefficient.of(int(rng.integers(-3, 4))),
        Coefficient.of(Fraction(int(rng.integers(1, 5)),
                                int(rng.integers(1, 5)))),
        Coefficient.of(im_rat=1),
        Coefficient.of(re_sqrt2=Fraction(1, 2)),
        Coefficient.of(-1),
    ]
    return num(choices[int(rng.integers(0, len(choices)))])


# ---------------------------------------------------------------------------
# Rule soundness
# ---------------------------------------------------------------------------

@dataclass
class SoundnessReport:
    rule_id: str
    trials: int
    passed: int
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def to_dict(self) -> dict:
        out = {"rule": self.rule_id, "trials": self.trials,
               "passed": self.passed, "ok": self.ok}
        if self.counterexample:
            out["counterexample"] = self.counterexample
        return out


def _rule_metavars(rule: Rule) -> list[str]:
    from .rules import _collect_metavars  # shared walker
    acc: set[str] = set()
    _collect_metavars(rule.lhs, acc)
    _collect_metavars(rule.rhs, acc)
    return sorted(acc)


def _rule_vars(rule: Rule) -> dict[str, Sort]:
    from .rules import _collect_vars
    acc: dict[str, Sort] = {}
    _collect_vars(rule.lhs, acc)
    _collect_vars(rule.rhs, acc)
    return acc


def _concrete_sort(sort: Sort, spaces: dict[str, Space]) -> Sort:
    if isinstance(sort, ScalarSort):
        return sort
    sp = sort.space  # type: ignore[union-attr]
    labels = list(sp.labels)
    for mv in sp.metavars:
        labels.extend(spaces[mv].labels)
    out = Space(tuple(labels))
    return VectorSort(out) if isinstance(sort, VectorSort) else OperatorSort(out)


def check_rule_soundness(rule: Rule, trials: int = 100, seed: int = 0,
                         tol: float = DEFAULT_TOLERANCE,
                         depth: int = 3) -> SoundnessReport:
    """Evaluate both sides of the rule on random instantiations and models."""
    rule_salt = zlib.crc32(rule.rule_id.encode())
    passed = 0
    counterexample = None
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial, rule_salt])
        spaces: dict[str, Space] = {}
        fresh = 0
        for mv in _rule_metavars(rule):
            if mv in rule.atomic_metavars or rng.random() < 0.5:
                spaces[mv] = Space.of(f"m{fresh}")
                fresh += 1
            else:
                spaces[mv] = Space.of(f"m{fresh}", f"m{fresh + 1}")
                fresh += 2
        ambient = [f"m{fresh}", f"m{fresh + 1}"]
        bindings: dict[str, Term] = {}
        for name, srt in _rule_vars(rule).items():
            bindings[name] = random_ground_term(
                _concrete_sort(srt, spaces), rng, depth=depth,
                ambient_labels=ambient)
        m = Match(bindings, spaces)
        lhs = instantiate(rule.lhs, m)
        rhs = instantiate(rule.rhs, m)
        model = random_model([lhs, rhs],
                             seed=int(rng.integers(0, 2 ** 31)))
        va = eval_term(lhs, model)
        vb = eval_term(rhs, model)
        if values_close(va, vb, tol):
            passed += 1
        elif counterexample is None:
            from .syntax import render_canonical
            counterexample = {
                "trial": trial,
                "lhs": render_canonical(lhs),
                "rhs": render_canonical(rhs),
                "difference": _difference(va, vb),
            }
    return SoundnessReport(rule.rule_id, trials, passed, counterexample)


def _difference(a: ConcreteValue, b: ConcreteValue) -> float:
    if a.kind != b.kind or np.shape(a.value) != np.shape(b.value):
        return float("inf")
    return float(np.linalg.norm(np.asarray(a.value) - np.asarray(b.value)))


def mutated_rules() -> dict[str, Rule]:
    """Deliberately broken rule variants, as negative controls for the
    soundness checker: each must fail its trials."""
    from .terms import var_s, var_v
    s = Space.var("s")
    a = var_s("a")
    v1, v2, v3 = (var_v(n, s) for n in ("v1", "v2", "v3"))
    return {
        # conjugate dropped from the conjugate-linear slot
        "multiplyLeftIP": Rule("multiplyLeftIP",
                               ip(times_v(a, v1), v2),
                               times_s(a, ip(v1, v2))),
        # inner-product arguments swapped on the right side
        "applyProjector": Rule("applyProjector",
                               apply(projector(v1, v2), v3),
                               times_v(ip(v3, v2), v1)),
    }
