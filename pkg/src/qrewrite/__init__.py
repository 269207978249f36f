"""qrewrite: many-sorted term rewriting for Dirac-style quantum algebra.

The package models quantum-mechanical expressions (vectors, operators
and scalars over labelled Hilbert spaces) as sorted terms, rewrites them
with a catalogue of bidirectional rules applied at explicit positions,
normalizes them to a canonical form, and cross-checks every rule and
derivation against a finite-dimensional numerical oracle.
"""

from .coefficient import Coefficient
from .errors import (
    DirectionNotAllowed, IllFormedRule, InvalidPosition, NoMatch, ParseError,
    QRewriteError, ReplayError, SortError, StepLimitExceeded, UnknownRule,
    UnassignedConstant,
)
from .interp import (
    ConcreteValue, Model, check_rule_soundness, eval_term, mutated_rules,
    random_ground_term, random_model, values_close,
)
from .rules import (
    FORWARD, REVERSE, Match, Registry, RewriteStep, Rule, applicable,
    applicable_at, apply_rule, builtin_registry, conjugate_ip_rule,
    default_registry, instantiate, match, register_user_rules,
    shipped_user_rules, validate_rule,
)
from .scalars import ScalarMonomial, ScalarPoly, normalize_scalar, scalar_equal
from .session import SessionState
from .strategy import (
    Derivation, NormalizeConfig, equivalent, normalize, replay,
)
from .syntax import (
    DerivationDocument, SourceSpan, parse_derivation, parse_pattern,
    parse_rule_line, parse_rules_file, parse_term, render_canonical,
    render_derivation, render_dirac, render_dirac_annotated, render_rule,
    rules_markdown,
)
from .terms import (
    App, ConstOperator, ConstVector, FunctionSymbol, NumericScalar,
    OperatorSort, Position, ScalarAtom, ScalarSort, Sort, Space, Term, Var,
    VectorSort, apply, compose, conjugate, const_o, const_v, format_position,
    ip, is_ground, iter_subterms, num, parse_position, plus_o, plus_s, plus_v,
    positions_of, projector, replace_at, sort_of, subterm_at, tensor_o,
    tensor_space, tensor_v, term_size, times_o, times_s, times_v, var_o,
    var_s, var_v,
)

__version__ = "0.1.0"
