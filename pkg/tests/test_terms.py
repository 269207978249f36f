import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrewrite import (
    InvalidPosition, OperatorSort, ScalarSort, SortError, Space, VectorSort,
    apply, const_o, const_v, ip, num, plus_v, positions_of, projector,
    replace_at, sort_of, subterm_at, tensor_space, tensor_v, times_v,
)
from qrewrite.terms import format_position, parse_position, term_size

from conftest import random_term

labels = st.lists(st.sampled_from(["a", "a2", "b", "c", "H1", "H2"]),
                  min_size=1, max_size=4)


def spaces(draw_labels):
    return Space(tuple(draw_labels))


class TestSpace:
    def test_sorted_storage(self):
        assert Space.of("a2", "a").labels == ("a", "a2")

    def test_join_is_multiset_union(self):
        assert tensor_space(Space.of("a2"), Space.of("a")) == Space.of("a", "a2")
        left = tensor_space(Space.of("H1", "H2"), Space.of("H3"))
        right = tensor_space(Space.of("H1"), Space.of("H2", "H3"))
        assert left == right == Space.of("H1", "H2", "H3")

    @settings(max_examples=1000, deadline=None)
    @given(labels, labels)
    def test_join_commutes(self, l1, l2):
        s1, s2 = spaces(l1), spaces(l2)
        assert tensor_space(s1, s2) == tensor_space(s2, s1)

    @settings(max_examples=1000, deadline=None)
    @given(labels, labels, labels)
    def test_join_associates(self, l1, l2, l3):
        s1, s2, s3 = spaces(l1), spaces(l2), spaces(l3)
        assert tensor_space(tensor_space(s1, s2), s3) == \
            tensor_space(s1, tensor_space(s2, s3))

    def test_duplicates_allowed(self):
        s = tensor_space(Space.of("H"), Space.of("H"))
        assert s.labels == ("H", "H")


class TestSortOf:
    def test_constant_base_case(self):
        assert sort_of(const_v("psi", "a")) == VectorSort(Space.of("a"))

    def test_tensor_sort_respects_semigroup(self):
        v1 = const_v("v1", Space.of("H1", "H2"))
        v2 = const_v("v2", Space.of("H3"))
        v3 = const_v("v3", Space.of("H1"))
        v4 = const_v("v4", Space.of("H2", "H3"))
        assert sort_of(tensor_v(v1, v2)) == sort_of(tensor_v(v3, v4))
        assert sort_of(tensor_v(v1, v2)) == VectorSort(Space.of("H1", "H2", "H3"))

    def test_cross_space_ip_rejected(self):
        with pytest.raises(SortError):
            ip(const_v("x", "a"), const_v("y", "b"))

    def test_cross_space_apply_rejected(self):
        with pytest.raises(SortError):
            apply(const_o("p", "a"), const_v("x", "b"))

    def test_projector_is_operator(self):
        t = projector(const_v("x", "a"), const_v("y", "a"))
        assert sort_of(t) == OperatorSort(Space.of("a"))

    def test_scalar_sort(self):
        assert isinstance(sort_of(num(1)), ScalarSort)

    def test_tensor_commutes_in_sort(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = random_term(rng)
            if isinstance(sort_of(x), VectorSort):
                y = const_v("other", Space.of("zz"))
                assert sort_of(tensor_v(x, y)) == sort_of(tensor_v(y, x))


class TestPositions:
    def test_root(self, table1_row1):
        assert subterm_at(table1_row1, ()) is table1_row1

    def test_path(self):
        s = num(2)
        v = const_v("v", "a")
        t = apply(const_o("p", "a"), times_v(s, v))
        assert subterm_at(t, (2, 1)) is s

    def test_table1_row3_position(self, registry, table1_row1):
        from qrewrite import RewriteStep, apply_rule
        t = apply_rule(table1_row1,
                       RewriteStep("multiplyRightApply", "fwd", ()), registry)
        t = apply_rule(t, RewriteStep("expandRightApply", "fwd", (2,)), registry)
        sub = subterm_at(t, (2, 2))
        assert sub.symbol == "apply"
        assert sub.args[0].symbol == "projector"
        assert sub.args[1].symbol == "timesV"

    def test_invalid(self):
        with pytest.raises(InvalidPosition):
            subterm_at(const_v("v", "a"), (1,))

    def test_preorder_enumeration(self):
        x, y = const_v("x", "a"), const_v("y", "a")
        t = plus_v(x, times_v(num(1), y))
        assert positions_of(t) == [(), (1,), (2,), (2, 1), (2, 2)]

    def test_positions_count_nodes(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            t = random_term(rng)
            assert len(positions_of(t)) == term_size(t)


class TestReplaceAt:
    def test_root_replacement(self):
        x, y = const_v("x", "a"), const_v("y", "a")
        assert replace_at(x, (), y) == y

    def test_child_replacement(self):
        x, y, z = (const_v(n, "a") for n in "xyz")
        assert replace_at(plus_v(x, y), (2,), z) == plus_v(x, z)

    def test_sort_change_rejected(self):
        x, y = const_v("x", "a"), const_v("y", "b")
        with pytest.raises(SortError):
            replace_at(plus_v(x, x), (2,), y)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            t = random_term(rng)
            for p in positions_of(t):
                assert replace_at(t, p, subterm_at(t, p)) == t


def test_position_formatting():
    assert format_position(()) == "eps"
    assert format_position((2, 2, 1)) == "2.2.1"
    assert parse_position("eps") == ()
    assert parse_position("2.2.1") == (2, 2, 1)
    with pytest.raises(InvalidPosition):
        parse_position("0.1")
