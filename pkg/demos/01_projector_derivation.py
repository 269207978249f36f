"""Deriving the action of a projector on a superposition, step by step.

Starts from |alpha><alpha| applied to (1/sqrt2)(|beta> - |gamma>) and
applies eight rules at explicit positions until the scalar prefactor is
fully collected. Each intermediate state is printed in Dirac form.
"""

from qrewrite import apply_rule, default_registry, parse_term, render_dirac
from qrewrite.rules import RewriteStep

registry = default_registry()

term = parse_term(
    "apply(projector(V:alpha@a, V:alpha@a), "
    "timesV(1/sqrt2, plusV(V:beta@a, timesV(-1, V:gamma@a))))")

steps = [
    ("multiplyRightApply", "fwd", ()),
    ("expandRightApply", "fwd", (2,)),
    ("multiplyRightApply", "fwd", (2, 2)),
    ("applyProjector", "fwd", (2, 1)),
    ("applyProjector", "fwd", (2, 2, 2)),
    ("multiplyLeftV", "fwd", (2, 2)),
    ("expandLeftV", "rev", (2,)),
    ("multiplyLeftV", "fwd", ()),
]

print(f"start: {render_dirac(term)}\n")
for rule_id, direction, position in steps:
    term = apply_rule(term, RewriteStep(rule_id, direction, position), registry)
    where = ".".join(map(str, position)) or "eps"
    print(f"{rule_id} {direction} @ {where}")
    print(f"   -> {render_dirac(term)}\n")

print("The same eight steps ship as src/qrewrite/fixtures/table1.deriv;")
print("verify them with: qrewrite replay src/qrewrite/fixtures/table1.deriv")
