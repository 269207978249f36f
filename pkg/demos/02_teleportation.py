"""Quantum teleportation, derived by rewriting alone.

Alice holds an unknown qubit alpha|0> + beta|1> in space a2 and shares a
Bell pair with Bob (spaces a and b). Applying CNOT(a2 -> a) then a
Hadamard on a2 is expressed as a single term; normalization expands the
circuit, fires the gate rules, and collects the result into the familiar
four-branch state with prefactor 1/2.
"""

from collections import Counter

from qrewrite import default_registry, normalize, parse_term, render_dirac, replay

registry = default_registry()

start = parse_term(
    "apply(compose(tensorO(tensorO(O:h@a2, O:id@a), O:id@b), "
    "tensorO(O:c@a2*a, O:id@b)), "
    "tensorV(plusV(timesV(S:alpha, V:0@a2), timesV(S:beta, V:1@a2)), "
    "timesV(1/sqrt2, plusV(tensorV(V:0@a, V:0@b), tensorV(V:1@a, V:1@b)))))")

print("start term (Dirac):")
print(" ", render_dirac(start), "\n")

final, derivation = normalize(start, registry)

print(f"normalized in {len(derivation.steps)} recorded rule applications")
by_rule = Counter(step.rule_id for step in derivation.steps)
for rule_id, count in by_rule.most_common(8):
    print(f"  {count:3d} x {rule_id}")
print()

print("teleported state:")
print(" ", render_dirac(final), "\n")

assert replay(derivation.initial, derivation.steps, registry) == final
print("the recorded derivation replays exactly; measuring Alice's qubits")
print("in the computational basis leaves Bob holding alpha|0> + beta|1>")
print("up to the X/Z corrections indicated by her outcome.")
