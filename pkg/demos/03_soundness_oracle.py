"""Checking rewrite rules against a finite-dimensional numerical oracle.

Every rule is an equation: both sides must evaluate to the same concrete
value under any assignment of vectors, operators and scalars. The oracle
draws random assignments (dimensions 2-3, unit-disc complex entries) and
compares both sides numerically. A deliberately broken rule variant
shows a failure being caught.
"""

from qrewrite import check_rule_soundness, default_registry, mutated_rules

registry = default_registry()

print("spot-checking five rules, 100 random trials each:")
for rule_id in ("applyProjector", "multiplyLeftIP", "commuteTV",
                "tensor.apply", "user.cnot10"):
    report = check_rule_soundness(registry.get(rule_id), trials=100, seed=0)
    print(f"  {rule_id:18s} {report.passed}/{report.trials} "
          f"{'ok' if report.ok else 'FAILED'}")

print()
print("negative control: drop the conjugate from multiplyLeftIP")
broken = mutated_rules()["multiplyLeftIP"]
report = check_rule_soundness(broken, trials=100, seed=0)
print(f"  mutated rule passes only {report.passed}/{report.trials} trials")
example = report.counterexample
print(f"  first counterexample (trial {example['trial']}):")
print(f"    lhs: {example['lhs']}")
print(f"    rhs: {example['rhs']}")
print(f"    |difference| = {example['difference']:.3g}")
print()
print("run the full sweep with: qrewrite soundness --trials 100")
