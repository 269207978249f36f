import numpy as np
import pytest

from qrewrite import (
    DirectionNotAllowed, IllFormedRule, NoMatch, RewriteStep, Rule, Space,
    applicable, apply_rule, builtin_registry, const_o, const_v, instantiate,
    match, num, parse_term, plus_v, register_user_rules, shipped_user_rules,
    sort_of, subterm_at, times_v, validate_rule, var_s, var_v,
)
from qrewrite.coefficient import ONE_OVER_SQRT2
from qrewrite.rules import FORWARD, REVERSE
from qrewrite.terms import positions_of

from conftest import random_term


class TestRegistry:
    def test_exactly_the_catalogue(self, registry):
        assert len(builtin_registry()) == 34

    def test_default_adds_the_seven_gate_rules(self, registry):
        assert len(registry) == 41
        ids = {r.rule_id for r in registry.rules}
        assert {"user.hadamard0", "user.hadamard1", "user.cnot00",
                "user.cnot01", "user.cnot10", "user.cnot11",
                "user.identity"} <= ids

    def test_every_builtin_is_bidirectional(self):
        assert all(r.bidirectional for r in builtin_registry().rules)

    def test_gate_rules_are_one_directional(self):
        assert all(not r.bidirectional for r in shipped_user_rules())


class TestMatch:
    def test_factor_extraction_binding(self, registry):
        rule = registry.get("expandRightApply")
        # after pulling the scalar out, the rule sees plusV directly
        lhs_example = parse_term(
            "timesV(1/sqrt2, plusV(V:beta@a, timesV(-1, V:gamma@a)))")
        pattern = registry.get("expandRightV").lhs
        m = match(pattern, lhs_example)
        assert m is not None
        assert m.term_bindings["a"] == num(ONE_OVER_SQRT2)
        assert m.term_bindings["v1"] == parse_term("V:beta@a")
        assert m.term_bindings["v2"] == parse_term("timesV(-1, V:gamma@a)")

    def test_head_mismatch(self):
        s = Space.var("s")
        pattern = plus_v(var_v("v1", s), var_v("v2", s))
        assert match(pattern, const_v("x", "a")) is None

    def test_space_metavariable_binds_concrete_space(self, registry):
        rule = registry.get("user.hadamard0")
        t = parse_term("apply(O:h@a2, V:0@a2)")
        m = match(rule.lhs, t, rule.atomic_metavars)
        assert m is not None
        assert m.space_bindings == {"s": Space.of("a2")}

    def test_atomic_constraint_respected(self, registry):
        rule = registry.get("user.hadamard0")
        t = parse_term("apply(O:h@a*b, V:0@a*b)")
        assert match(rule.lhs, t, rule.atomic_metavars) is None

    def test_identity_rule_allows_compound_spaces(self, registry):
        rule = registry.get("user.identity")
        t = parse_term("apply(O:id@a*b, tensorV(V:x@a, V:y@b))")
        m = match(rule.lhs, t, rule.atomic_metavars)
        assert m is not None
        assert m.space_bindings["s"] == Space.of("a", "b")

    def test_soundness_of_matching(self, registry):
        # any successful match reproduces the matched term on instantiation
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(1000):
            t = random_term(rng)
            for step in applicable(t, registry):
                rule = registry.get(step.rule_id)
                pattern = rule.lhs if step.direction == FORWARD else rule.rhs
                sub = subterm_at(t, step.position)
                m = match(pattern, sub, rule.atomic_metavars)
                assert m is not None
                assert instantiate(pattern, m) == sub
                checked += 1
        assert checked > 1000  # the fuzz exercised matches at scale


class TestApplyRule:
    def test_table1_first_transition(self, registry, table1_row1):
        out = apply_rule(table1_row1,
                         RewriteStep("multiplyRightApply", FORWARD, ()),
                         registry)
        assert out == parse_term(
            "timesV(1/sqrt2, apply(projector(V:alpha@a, V:alpha@a), "
            "plusV(V:beta@a, timesV(-1, V:gamma@a))))")

    def test_forward_then_reverse_is_identity(self, registry):
        rng = np.random.default_rng(12)
        rounds = 0
        for _ in range(300):
            t = random_term(rng)
            steps = applicable(t, registry)
            bidir = [s for s in steps
                     if registry.get(s.rule_id).bidirectional
                     and s.direction == FORWARD]
            if not bidir:
                continue
            step = bidir[int(rng.integers(0, len(bidir)))]
            forward = apply_rule(t, step, registry)
            back = apply_rule(
                forward, RewriteStep(step.rule_id, REVERSE, step.position),
                registry)
            assert back == t
            rounds += 1
        assert rounds > 100

    def test_locality(self, registry):
        # rewriting below one branch leaves the sibling untouched
        t = parse_term("plusV(timesV(2, timesV(3, V:x@a)), V:y@a)")
        out = apply_rule(t, RewriteStep("multiplyLeftV", FORWARD, (1,)),
                         registry)
        assert subterm_at(out, (2,)) == subterm_at(t, (2,))
        assert subterm_at(out, (1,)) == parse_term("timesV(timesS(2, 3), V:x@a)")

    def test_projector_rule(self, registry):
        t = parse_term("apply(projector(V:psi@s, V:phi@s), V:theta@s)")
        out = apply_rule(t, RewriteStep("applyProjector", FORWARD, ()), registry)
        assert out == parse_term("timesV(ip(V:phi@s, V:theta@s), V:psi@s)")

    def test_reverse_of_one_directional_rule_refused(self, registry):
        t = parse_term("timesV(1/sqrt2, plusV(V:0@a, V:1@a))")
        with pytest.raises(DirectionNotAllowed):
            apply_rule(t, RewriteStep("user.hadamard0", REVERSE, ()), registry)

    def test_no_match_reported(self, registry):
        with pytest.raises(NoMatch):
            apply_rule(const_v("x", "a"),
                       RewriteStep("expandRightV", FORWARD, ()), registry)

    def test_sort_preserved_under_rewriting(self, registry):
        rng = np.random.default_rng(13)
        for _ in range(200):
            t = random_term(rng)
            srt = sort_of(t)
            steps = applicable(t, registry)
            if not steps:
                continue
            step = steps[int(rng.integers(0, len(steps)))]
            assert sort_of(apply_rule(t, step, registry)) == srt


class TestApplicable:
    def test_bare_constant_has_no_moves(self, registry):
        assert applicable(const_v("v", "a"), registry) == []

    def test_table1_row1_contains_published_choice(self, registry, table1_row1):
        steps = applicable(table1_row1, registry)
        assert RewriteStep("multiplyRightApply", FORWARD, ()) in steps

    def test_every_listed_step_applies(self, registry):
        rng = np.random.default_rng(14)
        for _ in range(100):
            t = random_term(rng)
            for step in applicable(t, registry):
                apply_rule(t, step, registry)  # must not raise

    def test_deterministic_order(self, registry, table1_row1):
        a = applicable(table1_row1, registry)
        assert a == applicable(table1_row1, registry)
        # position preorder is the major key, rule id the minor one
        preorder = positions_of(table1_row1)
        pos_rank = {p: i for i, p in enumerate(preorder)}
        keys = [(pos_rank[s.position], s.rule_id, s.direction != FORWARD)
                for s in a]
        assert keys == sorted(keys)


class TestUserRules:
    def test_hadamard_on_one(self, registry):
        t = parse_term("apply(O:h@s1, V:1@s1)")
        out = apply_rule(t, RewriteStep("user.hadamard1", FORWARD, ()), registry)
        assert out == parse_term(
            "timesV(1/sqrt2, plusV(V:0@s1, timesV(-1, V:1@s1)))")

    def test_cnot_flips_target_when_control_set(self, registry):
        t = parse_term("apply(O:c@s1*s2, tensorV(V:1@s1, V:0@s2))")
        out = apply_rule(t, RewriteStep("user.cnot10", FORWARD, ()), registry)
        assert out == parse_term("tensorV(V:1@s1, V:1@s2)")

    def test_cnot_control_order_matters(self, registry):
        # control a2 (first parameter) stays, target a flips
        t = parse_term("apply(O:c@a2*a, tensorV(V:1@a2, V:0@a))")
        out = apply_rule(t, RewriteStep("user.cnot10", FORWARD, ()), registry)
        assert out == parse_term("tensorV(V:1@a2, V:1@a)")

    def test_unbound_rhs_variable_rejected(self, registry):
        s = Space.var("s")
        bad = Rule("user.bad", var_v("v1", s), var_v("v2", s),
                   bidirectional=False)
        with pytest.raises(IllFormedRule):
            register_user_rules(registry, [bad])

    def test_sort_changing_rule_rejected(self, registry):
        bad = Rule("user.bad2", var_s("a1"),
                   times_v(var_s("a1"), const_v("x", "a")))
        with pytest.raises(IllFormedRule):
            register_user_rules(registry, [bad])

    def test_registration_extends(self, registry):
        s = Space.var("s")
        extra = Rule("user.double", times_v(num(2), var_v("v1", s)),
                     plus_v(var_v("v1", s), var_v("v1", s)),
                     bidirectional=False)
        reg2 = register_user_rules(registry, [extra])
        assert len(reg2) == len(registry) + 1
        assert registry.get("user.double") is None
