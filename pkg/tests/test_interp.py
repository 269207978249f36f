import numpy as np
import pytest

from qrewrite import (
    Model, Space, UnassignedConstant, VectorSort, apply, check_rule_soundness,
    const_o, const_v, eval_term, ip, mutated_rules, num, parse_term, plus_v,
    projector, random_ground_term, random_model, sort_of, tensor_v, times_v,
    values_close,
)
from qrewrite.terms import OperatorSort, ScalarSort

from conftest import TELEPORT_START, random_term


class TestEval:
    def test_projector_definition(self):
        # applying |psi><phi| equals scaling psi by <phi, theta>
        lhs = parse_term("apply(projector(V:psi@s, V:phi@s), V:theta@s)")
        rhs = parse_term("timesV(ip(V:phi@s, V:theta@s), V:psi@s)")
        for seed in range(20):
            m = random_model([lhs, rhs], seed=seed)
            assert values_close(eval_term(lhs, m), eval_term(rhs, m))

    def test_ip_is_positive_on_diagonal(self):
        t = parse_term("ip(V:v@s, V:v@s)")
        for seed in range(20):
            m = random_model([t], seed=seed)
            val = eval_term(t, m).value
            assert abs(val.imag) < 1e-12
            assert val.real >= 0

    def test_ip_conjugate_linear_in_first_argument(self):
        lhs = parse_term("ip(timesV(S:a, V:x@s), V:y@s)")
        rhs = parse_term("timesS(conjugate(S:a), ip(V:x@s, V:y@s))")
        for seed in range(10):
            m = random_model([lhs, rhs], seed=seed)
            assert values_close(eval_term(lhs, m), eval_term(rhs, m))

    def test_operator_linearity(self):
        lhs = parse_term("apply(O:p@s, plusV(V:x@s, V:y@s))")
        rhs = parse_term("plusV(apply(O:p@s, V:x@s), apply(O:p@s, V:y@s))")
        for seed in range(10):
            m = random_model([lhs, rhs], seed=seed)
            assert values_close(eval_term(lhs, m), eval_term(rhs, m))

    def test_computational_basis_fixed(self):
        t = parse_term("V:0@q")
        m = random_model([t], seed=0)
        vec = eval_term(t, m).value
        assert vec[0] == 1 and abs(np.linalg.norm(vec) - 1) < 1e-12

    def test_kind_and_dimension_agree_with_sort(self):
        rng = np.random.default_rng(21)
        for i in range(100):
            t = random_term(rng)
            m = random_model([t], seed=i)
            v = eval_term(t, m)
            srt = sort_of(t)
            if isinstance(srt, ScalarSort):
                assert v.kind == "scalar"
            elif isinstance(srt, VectorSort):
                assert v.kind == "vector"
                assert v.value.shape == (m.dim_of(srt.space),)
            else:
                assert v.kind == "operator"
                d = m.dim_of(srt.space)
                assert v.value.shape == (d, d)

    def test_tensor_factor_order_is_immaterial(self):
        a = parse_term("tensorV(V:x@p, V:y@q)")
        b = parse_term("tensorV(V:y@q, V:x@p)")
        for seed in range(10):
            m = random_model([a, b], seed=seed)
            assert values_close(eval_term(a, m), eval_term(b, m))

    def test_unassigned_constant(self):
        t = const_v("lonely", "a")
        m = Model(dims={"a": 2})
        with pytest.raises(UnassignedConstant):
            eval_term(t, m)


class TestTeleportOracle:
    def test_matches_dense_circuit_simulation(self):
        # alpha=1, beta=0: the teleported state equals a direct 8-dim
        # matrix simulation of CNOT followed by Hadamard
        start = parse_term(TELEPORT_START.replace("S:alpha", "1")
                           .replace("S:beta", "0"))
        m = random_model([start], seed=3, dim_choices=(2,))
        got = eval_term(start, m)

        # independent simulation, basis ordered (a, a2, b), all dims 2
        eye = np.eye(2)
        had = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        # CNOT control a2, target a in (a, a2) ordering: |ia,ic> -> |ia^ic,ic>
        cnot = np.zeros((4, 4))
        for ia in range(2):
            for ic in range(2):
                cnot[(ia ^ ic) * 2 + ic, ia * 2 + ic] = 1
        # state: |0>_a2 with the Bell pair on (a, b); order (a, a2, b)
        e0, e1 = np.array([1, 0 + 0j]), np.array([0, 1 + 0j])
        psi = (np.kron(e0, np.kron(e0, e0)) +
               np.kron(e1, np.kron(e0, e1))) / np.sqrt(2)
        u_cnot = np.kron(cnot, eye)                      # (a,a2) x b
        u_h = np.kron(eye, np.kron(had, eye))            # h on a2
        expected = u_h @ (u_cnot @ psi)
        assert np.linalg.norm(got.value - expected) < 1e-9

    def test_all_dims_in_choices(self):
        rng = np.random.default_rng(22)
        for i in range(30):
            t = random_term(rng)
            m = random_model([t], seed=i)
            assert set(m.dims.values()) <= {2, 3}

    def test_same_seed_same_model(self):
        t = parse_term(TELEPORT_START)
        m1 = random_model([t], seed=9)
        m2 = random_model([t], seed=9)
        assert m1.dims == m2.dims
        for k in m1.vector_assign:
            assert np.array_equal(m1.vector_assign[k], m2.vector_assign[k])


class TestSoundness:
    def test_apply_projector_sound(self, registry):
        report = check_rule_soundness(registry.get("applyProjector"),
                                      trials=100, seed=0)
        assert report.ok

    def test_commute_tensor_sound_under_sorted_kronecker(self, registry):
        report = check_rule_soundness(registry.get("commuteTV"),
                                      trials=100, seed=0)
        assert report.ok

    def test_mutations_are_caught(self):
        for rid, rule in mutated_rules().items():
            report = check_rule_soundness(rule, trials=100, seed=0)
            assert not report.ok, f"mutation of {rid} went unnoticed"
            assert report.counterexample is not None

    def test_report_shape(self, registry):
        report = check_rule_soundness(registry.get("commuteV"),
                                      trials=10, seed=0)
        d = report.to_dict()
        assert d["rule"] == "commuteV" and d["ok"] and d["trials"] == 10
