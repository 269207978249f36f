"""Concrete text syntax: parsing and rendering of terms and derivations.

Term grammar (UTF-8):

    term     := SYMBOL "(" term {"," term} ")" | const
    const    := "V:" NAME "@" space ["#" NAME]     vector constant
              | "O:" NAME "@" space                operator constant
              | "S:" NAME                          symbolic scalar atom
              | numeric
    space    := part {"*" part}
    part     := LABEL | "?" NAME                   (?name only in patterns)
    numeric  := ["-"] piece {("+"|"-") piece}
    piece    := "sqrt2" | "i" ["*" "sqrt2"]
              | RATIONAL ["*" "sqrt2" | "/" "sqrt2"
                          | "*" "i" ["*" "sqrt2" | "/" "sqrt2"]]
    RATIONAL := INT ["/" INT]

An operator constant's space is written in its meaningful factor order
(`O:c@a2*a` is the gate controlled on a2), while vector spaces are plain
multisets.  Rule patterns additionally allow bare variables: names
starting with a, v or o stand for scalar, vector and operator variables,
the latter two optionally constrained as `v1@?s`.

Dirac rendering is output-only; the notation is too ambiguous to parse.

Derivation files are line oriented:

    qrewrite-derivation v1
    initial: <term>
    step: <ruleId> <fwd|rev> <position>
    expect: <term>

with positions written as dotted 1-based paths and `eps` for the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .coefficient import Coefficient, render_coefficient
from .errors import ParseError, SortError
from .rules import FORWARD, REVERSE, RewriteStep, Rule
from .terms import (
    App, ConstOperator, ConstVector, NumericScalar, OperatorSort, Position,
    ScalarAtom, ScalarSort, Space, Term, Var, VectorSort, format_position,
    parse_position, sort_of,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def pair(self) -> tuple[int, int]:
        return (self.start, self.end)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[():,@#*+\-/?])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str   # name | int | punct | eof
    text: str
    start: int
    end: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", (pos, pos + 1))
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(_Tok("eof", "", len(src), len(src)))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, src: str, allow_vars: bool):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.allow_vars = allow_vars

    def peek(self, offset: int = 0) -> _Tok:
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                             (t.start, t.end), expected=text)
        return t

    def fail(self, message: str, tok: Optional[_Tok] = None) -> ParseError:
        t = tok or self.peek()
        return ParseError(message, (t.start, t.end))

    # -- terms ------------------------------------------------------------

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "name":
            if self.peek(1).text == "(":
                return self.parse_funcall()
            if t.text in ("V", "O", "S") and self.peek(1).text == ":":
                return self.parse_const()
            if t.text in ("i", "sqrt2"):
                return self.parse_numeric()
            if self.allow_vars and t.text[0] in "avo":
                return self.parse_variable()
            raise self.fail(f"unknown constant or symbol {t.text!r}")
        if t.kind == "int" or t.text == "-":
            return self.parse_numeric()
        raise self.fail("expected a term")

    def parse_funcall(self) -> Term:
        name_tok = self.next()
        start = name_tok.start
        self.expect("(")
        args = [self.parse_term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.parse_term())
        close = self.expect(")")
        try:
            t = App(name_tok.text, tuple(args))
            sort_of(t)
        except ValueError as e:
            raise ParseError(str(e), (start, close.end)) from e
        except SortError as e:
            if e.span is None:
                raise SortError(e.reason, e.position, (start, close.end)) from e
            raise
        return t

    def parse_const(self) -> Term:
        kind_tok = self.next()
        self.expect(":")
        name_tok = self.next()
        if name_tok.kind not in ("name", "int"):
            raise self.fail("expected a constant name", name_tok)
        name = name_tok.text
        if kind_tok.text == "S":
            return ScalarAtom(name)
        self.expect("@")
        parts = self.parse_space_parts()
        if kind_tok.text == "V":
            tag: Optional[str] = None
            if self.peek().text == "#":
                self.next()
                tag_tok = self.next()
                if tag_tok.kind != "name":
                    raise self.fail("expected a basis tag", tag_tok)
                tag = tag_tok.text
            space = parts[0]
            for p in parts[1:]:
                space = space.join(p)
            return ConstVector(name, space, tag)
        return ConstOperator(name, tuple(parts))

    def parse_space_parts(self) -> list[Space]:
        parts = [self.parse_space_part()]
        while self.peek().text == "*":
            self.next()
            parts.append(self.parse_space_part())
        return parts

    def parse_space_part(self) -> Space:
        t = self.next()
        if t.text == "?":
            if not self.allow_vars:
                raise self.fail("space metavariables are only allowed in patterns", t)
            name_tok = self.next()
            if name_tok.kind != "name":
                raise self.fail("expected a metavariable name", name_tok)
            return Space.var(name_tok.text)
        if t.kind in ("name", "int"):
            return Space.of(t.text)
        raise self.fail("expected a space label", t)

    def parse_variable(self) -> Term:
        name_tok = self.next()
        name = name_tok.text
        kind = name[0]
        if kind == "a":
            return Var(name, ScalarSort())
        if self.peek().text == "@":
            self.next()
            parts = self.parse_space_parts()
            space = parts[0]
            for p in parts[1:]:
                space = space.join(p)
        else:
            # unconstrained variables range over a private fresh space
            space = Space.var("_" + name)
        return Var(name, VectorSort(space) if kind == "v" else OperatorSort(space))

    # -- numerics ----------------------------------------------------------

    def parse_numeric(self) -> NumericScalar:
        value = Coefficient.of(0)
        sign = 1
        if self.peek().text == "-":
            self.next()
            sign = -1
        value = value + self.parse_numeric_piece(sign)
        while self.peek().text in ("+", "-"):
            sign = 1 if self.next().text == "+" else -1
            value = value + self.parse_numeric_piece(sign)
        return NumericScalar(value)

    def parse_numeric_piece(self, sign: int) -> Coefficient:
        t = self.peek()
        if t.text == "sqrt2":
            self.next()
            return Coefficient.of(re_sqrt2=sign)
        if t.text == "i":
            self.next()
            if self.peek().text == "*" and self.peek(1).text == "sqrt2":
                self.next()
                self.next()
                return Coefficient.of(im_sqrt2=sign)
            return Coefficient.of(im_rat=sign)
        if t.kind != "int":
            raise self.fail("expected a numeric literal", t)
        rat = sign * self.parse_rational()
        imag = False
        sqrt2 = False
        while self.peek().text in ("*", "/"):
            op = self.peek().text
            unit = self.peek(1)
            if unit.text == "sqrt2" and not sqrt2:
                self.next()
                self.next()
                sqrt2 = True
                if op == "/":          # r/sqrt2 == (r/2)*sqrt2
                    rat = rat / 2
            elif unit.text == "i" and op == "*" and not imag:
                self.next()
                self.next()
                imag = True
            else:
                break
        if imag:
            return (Coefficient.of(im_sqrt2=rat) if sqrt2
                    else Coefficient.of(im_rat=rat))
        return (Coefficient.of(re_sqrt2=rat) if sqrt2
                else Coefficient.of(re_rat=rat))

    def parse_rational(self) -> Fraction:
        t = self.next()
        numer = int(t.text)
        if self.peek().text == "/" and self.peek(1).kind == "int":
            self.next()
            denom_tok = self.next()
            return Fraction(numer, int(denom_tok.text))
        return Fraction(numer)

    def finish(self) -> None:
        t = self.peek()
        if t.kind != "eof":
            raise self.fail(f"unexpected trailing input {t.text!r}")


def parse_term(src: str) -> Term:
    """Parse a ground term; sort checking happens during parse."""
    p = _Parser(src, allow_vars=False)
    t = p.parse_term()
    p.finish()
    return t


def parse_pattern(src: str) -> Term:
    """Parse a rule pattern: variables and space metavariables allowed."""
    p = _Parser(src, allow_vars=True)
    t = p.parse_term()
    p.finish()
    return t


# ---------------------------------------------------------------------------
# Canonical rendering
# ---------------------------------------------------------------------------

def _space_text(sp: Space) -> str:
    parts = list(sp.labels) + ["?" + v for v in sp.metavars]
    return "*".join(parts)


def render_canonical(t: Term) -> str:
    """Unique text per term; ``parse_term`` inverts it on ground terms
    and ``parse_pattern`` on patterns."""
    if isinstance(t, App):
        return f"{t.symbol}({', '.join(render_canonical(a) for a in t.args)})"
    if isinstance(t, ConstVector):
        base = f"V:{t.name}@{_space_text(t.space)}"
        default_tag = "computational" if t.name in ("0", "1") else None
        if t.basis_tag is not None and t.basis_tag != default_tag:
            base += f"#{t.basis_tag}"
        return base
    if isinstance(t, ConstOperator):
        return f"O:{t.name}@{'*'.join(_space_text(p) for p in t.params)}"
    if isinstance(t, ScalarAtom):
        return f"S:{t.name}"
    if isinstance(t, NumericScalar):
        return render_coefficient(t.value)
    assert isinstance(t, Var)
    if isinstance(t.sort, ScalarSort):
        return t.name
    sp = t.sort.space  # type: ignore[union-attr]
    if sp.metavars == ("_" + t.name,) and not sp.labels:
        return t.name
    return f"{t.name}@{_space_text(sp)}"


# ---------------------------------------------------------------------------
# Dirac rendering (output only)
# ---------------------------------------------------------------------------

def _dirac_coefficient(c: Coefficient) -> str:
    return render_coefficient(c).replace("sqrt2", "√2")


def _self_delimited(t: Term) -> bool:
    """True when the Dirac rendering of ``t`` needs no surrounding parens."""
    if isinstance(t, NumericScalar):
        text = _dirac_coefficient(t.value)
        return not ("+" in text[1:] or "-" in text[1:])
    if isinstance(t, App):
        return t.symbol in ("plusV", "plusO", "plusS", "ip", "projector",
                            "conjugate")
    return True


class _DiracRenderer:
    """Builds the Dirac text and records the span of every subterm."""

    def __init__(self) -> None:
        self.out: list[str] = []
        self.length = 0
        self.spans: list[tuple[Position, int, int]] = []

    def emit(self, text: str) -> None:
        self.out.append(text)
        self.length += len(text)

    def render(self, t: Term, pos: Position) -> None:
        start = self.length
        self._render(t, pos)
        self.spans.append((pos, start, self.length))

    def _wrapped(self, t: Term, pos: Position) -> None:
        if _self_delimited(t):
            self.render(t, pos)
        else:
            self.emit("(")
            self.render(t, pos)
            self.emit(")")

    def _render(self, t: Term, pos: Position) -> None:
        if isinstance(t, ConstVector):
            self.emit(f"|{t.name}⟩_{_subscript(t.space)}")
            return
        if isinstance(t, ConstOperator):
            if len(t.params) == 1:
                self.emit(f"{t.name}^_{_subscript(t.params[0])}")
            else:
                inner = ",".join(_space_text(p) for p in t.params)
                self.emit(f"{t.name}^_{{{inner}}}")
            return
        if isinstance(t, ScalarAtom):
            self.emit(t.name)
            return
        if isinstance(t, NumericScalar):
            self.emit(_dirac_coefficient(t.value))
            return
        if isinstance(t, Var):
            self.emit(t.name)
            return
        assert isinstance(t, App)
        sym = t.symbol
        if sym in ("plusV", "plusO", "plusS"):
            self.emit("(")
            self._wrapped(t.args[0], pos + (1,))
            self.emit(" + ")
            self._wrapped(t.args[1], pos + (2,))
            self.emit(")")
        elif sym in ("timesV", "timesO", "timesS"):
            self._wrapped(t.args[0], pos + (1,))
            self.emit(" ")
            self._wrapped(t.args[1], pos + (2,))
        elif sym == "apply":
            self._wrapped(t.args[0], pos + (1,))
            arg = t.args[1]
            if isinstance(arg, App) and arg.symbol == "plusV":
                # sums already render with their own parentheses
                self.emit(" ")
                self.render(arg, pos + (2,))
            else:
                self.emit(" (")
                self.render(arg, pos + (2,))
                self.emit(")")
        elif sym == "ip":
            self.emit("⟨")
            self._ip_arg(t.args[0], pos + (1,))
            self.emit(",")
            self._ip_arg(t.args[1], pos + (2,))
            self.emit("⟩")
        elif sym == "projector":
            space = sort_of(t).space  # type: ignore[union-attr]
            sub = _subscript(space)
            self.emit("|")
            self._ip_arg(t.args[0], pos + (1,))
            self.emit(f"⟩_{sub}⟨")
            self._ip_arg(t.args[1], pos + (2,))
            self.emit(f"|_{sub}")
        elif sym in ("tensorV", "tensorO"):
            self._wrapped(t.args[0], pos + (1,))
            self.emit(" ⊗ ")
            self._wrapped(t.args[1], pos + (2,))
        elif sym == "compose":
            self._wrapped(t.args[0], pos + (1,))
            self.emit(" · ")
            self._wrapped(t.args[1], pos + (2,))
        else:
            assert sym == "conjugate"
            self._wrapped(t.args[0], pos + (1,))
            self.emit("*")

    def _ip_arg(self, t: Term, pos: Position) -> None:
        # inside ⟨...⟩ and |...⟩⟨...| a plain constant shows just its name
        if isinstance(t, ConstVector):
            start = self.length
            self.emit(t.name)
            self.spans.append((pos, start, self.length))
        else:
            self.render(t, pos)


def _subscript(sp: Space) -> str:
    text = _space_text(sp)
    return text if (len(sp.labels) + len(sp.metavars)) == 1 else "{" + text + "}"


def render_dirac(t: Term) -> str:
    return render_dirac_annotated(t)[0]


def render_dirac_annotated(t: Term) -> tuple[str, list[dict]]:
    """Dirac text plus one {position, start, end} record per subterm."""
    r = _DiracRenderer()
    r.render(t, ())
    spans = [
        {"position": format_position(p), "start": s, "end": e}
        for p, s, e in sorted(r.spans, key=lambda x: (x[1], -x[2]))
    ]
    return "".join(r.out), spans


# ---------------------------------------------------------------------------
# Derivation documents
# ---------------------------------------------------------------------------

HEADER = "qrewrite-derivation v1"


@dataclass
class DerivationDocument:
    initial_text: str
    steps: list[RewriteStep] = field(default_factory=list)
    expect_text: Optional[str] = None

    def initial_term(self) -> Term:
        return parse_term(self.initial_text)

    def expect_term(self) -> Optional[Term]:
        return parse_term(self.expect_text) if self.expect_text else None


def parse_derivation(src: str) -> DerivationDocument:
    lines = src.splitlines()
    offset = 0
    doc: Optional[DerivationDocument] = None
    seen_header = False
    for n, line in enumerate(lines, start=1):
        span = (offset, offset + len(line))
        offset += len(line) + 1
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not seen_header:
            if stripped != HEADER:
                raise ParseError(f"line {n}: expected header {HEADER!r}", span)
            seen_header = True
            continue
        key, _, rest = stripped.partition(":")
        rest = rest.strip()
        if key == "initial":
            if doc is not None:
                raise ParseError(f"line {n}: duplicate initial", span)
            doc = DerivationDocument(rest)
        elif key == "step":
            if doc is None:
                raise ParseError(f"line {n}: step before initial", span)
            parts = rest.split()
            if len(parts) != 3 or parts[1] not in (FORWARD, REVERSE):
                raise ParseError(
                    f"line {n}: expected 'step: <ruleId> <fwd|rev> <position>'",
                    span)
            try:
                position = parse_position(parts[2])
            except Exception as e:
                raise ParseError(f"line {n}: bad position: {e}", span) from e
            doc.steps.append(RewriteStep(parts[0], parts[1], position))
        elif key == "expect":
            if doc is None:
                raise ParseError(f"line {n}: expect before initial", span)
            doc.expect_text = rest
        else:
            raise ParseError(f"line {n}: unknown directive {key!r}", span)
    if not seen_header:
        raise ParseError("empty derivation document", (0, 0))
    if doc is None:
        raise ParseError("derivation document has no initial term",
                         (0, len(src)))
    return doc


def render_derivation(doc: DerivationDocument) -> str:
    lines = [HEADER, f"initial: {doc.initial_text}"]
    for s in doc.steps:
        lines.append(f"step: {s.rule_id} {s.direction} {format_position(s.position)}")
    if doc.expect_text:
        lines.append(f"expect: {doc.expect_text}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Rule files and the rule catalogue document
# ---------------------------------------------------------------------------

def parse_rule_line(line: str) -> Rule:
    """One rule per line: ``id: lhs <-> rhs`` or ``id: lhs -> rhs``.

    A trailing ``[atomic: s1 s2]`` clause restricts those metavariables
    to single-label spaces.
    """
    atomic: frozenset[str] = frozenset()
    m = re.search(r"\[atomic:([^\]]*)\]\s*$", line)
    if m:
        atomic = frozenset(m.group(1).split())
        line = line[:m.start()].rstrip()
    name, sep, rest = line.partition(":")
    if not sep:
        raise ParseError("rule line needs 'id: lhs <-> rhs'", (0, len(line)))
    bidirectional = "<->" in rest
    arrow = "<->" if bidirectional else "->"
    lhs_text, sep, rhs_text = rest.partition(arrow)
    if not sep:
        raise ParseError("rule line needs an arrow (-> or <->)", (0, len(line)))
    lhs = parse_pattern(lhs_text.strip())
    rhs = parse_pattern(rhs_text.strip())
    return Rule(name.strip(), lhs, rhs, bidirectional, atomic)


def parse_rules_file(src: str) -> list[Rule]:
    out = []
    for line in src.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append(parse_rule_line(stripped))
    return out


def render_rule(rule: Rule) -> str:
    arrow = "<->" if rule.bidirectional else "->"
    text = f"{rule.rule_id}: {render_canonical(rule.lhs)} {arrow} {render_canonical(rule.rhs)}"
    if rule.atomic_metavars:
        text += f"  [atomic: {' '.join(sorted(rule.atomic_metavars))}]"
    return text


def rules_markdown(rules: list[Rule]) -> str:
    """The rule catalogue as a human-readable document."""
    lines = [
        "# Rule catalogue",
        "",
        "Each rule rewrites the left side to the right side; `<->` rules",
        "may also be used in reverse. Names starting with `a`, `v`, `o`",
        "are scalar, vector and operator variables; `?s` is a space",
        "metavariable. `[atomic: ...]` metavariables only bind a single",
        "space label.",
        "",
    ]
    for r in rules:
        arrow = "<->" if r.bidirectional else "->"
        lines.append(f"- `{r.rule_id}`:")
        lines.append(f"  `{render_canonical(r.lhs)}`")
        lines.append(f"  {arrow} `{render_canonical(r.rhs)}`")
        if r.atomic_metavars:
            lines.append(
                f"  (atomic: {', '.join(sorted(r.atomic_metavars))})")
    lines.append("")
    lines.append("Scalar bookkeeping (the assumed built-in scalar algebra) is")
    lines.append("recorded in derivations with the ids `scalar.normalize`,")
    lines.append("`scalar.timesOneV`, `scalar.timesOneO`, `scalar.dropZeroV`")
    lines.append("and `scalar.dropZeroO`; these are engine-internal and not")
    lines.append("part of the catalogue above.")
    return "\n".join(lines) + "\n"
