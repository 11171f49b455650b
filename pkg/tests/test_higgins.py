import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS, load
from nilfold.commutators import gamma
from nilfold.errors import BudgetExceeded, InexactSandwich, NotAGroup, ValidationError
from nilfold.higgins import (
    ONE,
    Leaf,
    Node,
    evaluate,
    find_reducible,
    fold_class,
    folded_reflection,
    format_term,
    group_higgins,
    higgins_lower,
    higgins_sandwich,
    higgins_upper,
    is_n_folded,
    parse_term,
    reduce_in_sum,
    reducible_elements,
    term_copies,
    term_depth,
    verify_witness,
)
from nilfold.loopcore import are_isomorphic, make_cyclic, make_elementary_abelian


def test_reducible_examples():
    assert reducible_elements(make_cyclic(6), 1, 3).elements == [0]
    Q8 = load("Q8")
    assert Q8.names.index("-1") in reducible_elements(Q8, 1, 3)
    O = load("O16")
    assert O.names.index("-1") in reducible_elements(O, 2, 4)


def test_q8_commutator_witness():
    Q8 = load("Q8")
    i, j = Q8.names.index("i"), Q8.names.index("j")
    w = Node("rdiv", Node("mul", Leaf(1, i), Leaf(2, j)), Node("mul", Leaf(2, j), Leaf(1, i)))
    assert verify_witness(Q8, 1, Q8.names.index("-1"), w)


def test_o16_associator_witness():
    O = load("O16")
    s = higgins_sandwich(O, 2, 4)
    t = s.witnesses[O.names.index("-1")]
    assert term_copies(t) == {1, 2, 3}
    assert verify_witness(O, 2, 1, t)


def test_lower_examples():
    assert higgins_lower(make_cyclic(1), 2, 4).is_trivial
    assert higgins_lower(load("O16"), 2, 4).elements == [0, 1]
    assert higgins_lower(load("Q8"), 2, 4).is_trivial


def test_upper_examples():
    E = make_elementary_abelian(2, 3)
    for n in (1, 2, 3):
        u = higgins_upper(E, n)
        assert u.subloop.is_trivial and u.certificate == "abelian-group-quotient"
    u = higgins_upper(load("O16"), 2)
    assert u.subloop.elements == [0, 1] and u.certificate == "abelian-group-quotient"
    u = higgins_upper(load("Q8"), 2)
    assert u.subloop.is_trivial and u.certificate.startswith("group-quotient-of-class")


def test_folded_examples():
    assert is_n_folded(load("O16"), 2, 4) == "no"
    assert is_n_folded(make_elementary_abelian(2, 3), 1, 3) == "yes"
    assert is_n_folded(load("Q8"), 2, 4) == "yes"


def test_group_higgins_examples():
    assert group_higgins(make_cyclic(5), 1).is_trivial
    assert group_higgins(load("Q8"), 1).elements == [0, 1]
    assert group_higgins(load("D4"), 2, cross_check_depth=4).is_trivial
    with pytest.raises(NotAGroup):
        group_higgins(load("O16"), 1)


def test_folded_reflection_examples():
    J, _ = folded_reflection(load("S3"), 1)
    assert J.order == 2
    J, _ = folded_reflection(load("O16"), 2)
    assert are_isomorphic(J, make_elementary_abelian(2, 3))
    J, eta = folded_reflection(load("Q8"), 2)
    assert eta.is_isomorphism
    for name in ("D4", "Q8", "Heis27"):
        L = load(name)
        J, _ = folded_reflection(L, 1)
        assert J.order * gamma(L, 2).order == L.order


def test_o16_length_four_is_open():
    # the sandwich is consistent but no answer is asserted
    O = load("O16")
    s = higgins_sandwich(O, 3, 4)
    assert s.lower <= s.upper
    assert s.upper.elements == [0, 1]
    answer = is_n_folded(O, 3, 4)
    assert answer == ("yes" if s.upper.is_trivial else "no" if not s.lower.is_trivial else "unknown")
    if not s.exact:
        with pytest.raises(InexactSandwich):
            folded_reflection(O, 3)


def test_fold_class_values():
    assert fold_class(make_cyclic(1), 3).value() == 0
    assert fold_class(make_cyclic(4), 3).value() == 1
    assert fold_class(load("Q8"), 3).value() == 2
    assert fold_class(load("D8"), 3).value() == 3
    fc = fold_class(load("O16"), 2)
    assert fc.lower == 3 and fc.upper is None


def test_contraction_in_loop_is_not_enough():
    # x1 x2 x3 with x an involution: each contraction folds to 1 in D4,
    # yet the term is not trivial in the sum and x is not in gamma_3(D4)
    D4 = load("D4")
    x = 4  # a reflection
    assert D4.mul(x, x) == 0
    t = Node("mul", Node("mul", Leaf(1, x), Leaf(2, x)), Leaf(3, x))
    assert all(evaluate(D4, t, kill=i) == 0 for i in (1, 2, 3))
    assert reduce_in_sum(D4, t, kill=1) != ONE
    assert not verify_witness(D4, 2, evaluate(D4, t), t)
    assert x not in higgins_lower(D4, 2, 4)


def test_witnesses_replay(corpus_loop):
    _, L = corpus_loop
    for n in (1, 2):
        s = find_reducible(L, n, 4)
        assert s.verify()
        for w, t in s.witnesses.items():
            assert term_depth(t) <= 4
            assert verify_witness(L, n, w, parse_term(format_term(t)))


def test_lower_monotone_in_depth():
    for name in ("O16", "Q8", "D8", "S3"):
        L = load(name)
        prev = None
        for d in range(1, 6):
            cur = higgins_lower(L, 2, d)
            if prev is not None:
                assert prev <= cur
            prev = cur


def test_upper_chain_decreasing(corpus_loop):
    _, L = corpus_loop
    ups = [higgins_upper(L, n).subloop for n in range(4)]
    for a, b in zip(ups[1:], ups):
        assert a <= b


def test_sandwich_inclusion(corpus_loop):
    _, L = corpus_loop
    for n in (1, 2, 3):
        s = higgins_sandwich(L, n, 4)
        assert s.lower <= s.upper
        assert s.exact == (s.lower == s.upper)


def test_budget_exceeded_reports_partial():
    with pytest.raises(BudgetExceeded) as err:
        find_reducible(load("O16"), 2, 4, budget=50)
    assert err.value.depth_reached < 4


def test_parse_term_errors():
    with pytest.raises(ValidationError):
        parse_term("(mul 1:2")
    with pytest.raises(ValidationError):
        parse_term("(pow 1:1 2:2)")


@given(st.recursive(
    st.builds(Leaf, st.integers(1, 3), st.integers(0, 15)),
    lambda kids: st.builds(Node, st.sampled_from(["mul", "ldiv", "rdiv"]), kids, kids),
    max_leaves=8,
))
@settings(max_examples=80, deadline=None)
def test_sum_reduction_is_sound(t):
    """A term reducing to 1 in the sum also folds to 1 in L, and the
    reduction never changes the folded value."""
    O = load("O16")
    for kill in (None, 1, 2, 3):
        r = reduce_in_sum(O, t, kill)
        if r == ONE:
            assert evaluate(O, t, kill) == 0
    assert parse_term(format_term(t)) == t
