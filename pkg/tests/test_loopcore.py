import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS, load
from nilfold.errors import BadParameter, NoIdentity, NotAHomomorphism, NotLatinSquare, TooLarge, ValidationError
from nilfold.loopcore import (
    FiniteLoop,
    Homomorphism,
    builtin,
    direct_product,
    enumerate_homs,
    are_isomorphic,
    format_table,
    generating_set,
    identity_hom,
    is_associative,
    is_commutative,
    is_group,
    is_moufang,
    make_cyclic,
    make_elementary_abelian,
    make_octonion_loop,
    make_quaternion8,
    parse_table,
    validate_loop,
)
from nilfold.substructure import generate_subloop

O16_SHA256 = "0ae32ddcd0c5d082c2f22aa78c36655deecceb45208dfe85d84d4d77bded97fe"
ORDER5 = [[int(c) for c in row] for row in "01234 12043 23401 34120 40312".split()]


def test_trivial_loop():
    L = validate_loop([[0]])
    assert L.order == 1
    assert make_cyclic(1).order == 1


def test_cyclic_table():
    L = validate_loop([[(a + b) % 3 for b in range(3)] for a in range(3)])
    assert L.order == 3
    assert L == make_cyclic(3)


def test_repeated_entry_rejected():
    with pytest.raises(NotLatinSquare) as err:
        validate_loop([[0, 1], [1, 1]])
    assert err.value.row == 1 or err.value.column is not None


def test_identity_must_be_zero():
    # a Latin square whose identity is 1, not 0
    with pytest.raises(NoIdentity):
        validate_loop([[1, 0], [0, 1]])


def test_o16_moufang_not_associative():
    O = make_octonion_loop()
    assert O.order == 16
    assert is_moufang(O)
    a = is_associative(O)
    assert not a
    x, y, z = a.witness
    assert O.mul(O.mul(x, y), z) != O.mul(x, O.mul(y, z))


def test_o16_table_hash_is_pinned():
    assert make_octonion_loop().fingerprint() == O16_SHA256


def test_o16_two_generated_subloops_associative():
    O = make_octonion_loop()
    for a, b in itertools.combinations(range(16), 2):
        S = generate_subloop(O, [a, b])
        idx = np.asarray(S.elements)
        sub = O.table[np.ix_(idx, idx)]
        relabel = np.empty(16, dtype=np.int64)
        relabel[idx] = np.arange(idx.size)
        assert is_associative(FiniteLoop(relabel[sub]))


def test_groups_are_moufang(corpus_loop):
    _, L = corpus_loop
    if is_associative(L):
        assert is_moufang(L)


def test_small_associativity():
    assert is_associative(make_cyclic(4))
    assert is_associative(make_quaternion8())


def test_order5_loop_is_not_moufang():
    L = validate_loop(ORDER5)
    m = is_moufang(L)
    assert not m
    x, y, z = m.witness
    T = L.table
    lhs = T[T[z, T[x, y]], z]
    mid = T[T[z, x], T[y, z]]
    rhs = T[z, T[T[x, y], z]]
    assert not (lhs == mid == rhs)
    assert not is_associative(L)
    assert not is_commutative(L)


def test_direct_product_matches_elementary_abelian():
    Z2 = make_cyclic(2)
    assert are_isomorphic(direct_product(Z2, Z2), make_elementary_abelian(2, 2))


def test_hom_counts():
    Z2, Z3 = make_cyclic(2), make_cyclic(3)
    homs = enumerate_homs(Z2, Z3)
    assert len(homs) == 1 and np.all(homs[0].map == 0)
    assert len(enumerate_homs(Z2, Z2)) == 2
    assert len(enumerate_homs(Z3, direct_product(Z3, Z3))) == 9


def test_quaternion_order():
    assert make_quaternion8().order == 8


def test_non_homomorphism_rejected():
    Z4 = make_cyclic(4)
    with pytest.raises(NotAHomomorphism):
        Homomorphism(Z4, Z4, [0, 1, 1, 3])


def test_guards():
    with pytest.raises(TooLarge):
        is_associative(make_cyclic(65))
    with pytest.raises(TooLarge):
        enumerate_homs(make_cyclic(33), make_cyclic(2))


def test_divisions_are_total(corpus_loop):
    _, L = corpus_loop
    x = np.arange(L.order)[:, None]
    z = np.arange(L.order)[None, :]
    assert np.array_equal(L.table[x, L.ldiv(x, z)], np.broadcast_to(z, (L.order, L.order)))
    assert np.array_equal(L.table[L.rdiv(z, x), x], np.broadcast_to(z, (L.order, L.order)))


def test_moufang_inverses_two_sided():
    for name in CORPUS:
        L = load(name)
        inv = L.inverse(np.arange(L.order))
        assert np.all(L.table[np.arange(L.order), inv] == 0)
        assert np.all(L.table[inv, np.arange(L.order)] == 0)


def test_composition_and_identity(corpus_group):
    _, G = corpus_group
    if G.order > 8:
        return
    ident = identity_hom(G)
    for f in enumerate_homs(G, G)[:6]:
        assert ident.then(f) == f == f.then(ident)
        for g in enumerate_homs(G, G)[:6]:
            for h in enumerate_homs(G, G)[:3]:
                assert f.then(g).then(h) == f.then(g.then(h))


def test_table_roundtrip(corpus_loop):
    _, L = corpus_loop
    back = parse_table(format_table(L))
    assert back == L
    assert back.fingerprint() == L.fingerprint()


def test_parse_errors():
    with pytest.raises(ValidationError):
        parse_table("")
    with pytest.raises(ValidationError):
        parse_table("2\n0 1\n")
    with pytest.raises(ValidationError):
        parse_table("2\n0 1\n1 x\n")
    with pytest.raises(ValidationError):
        parse_table("1\n0\n0\nextra stuff here\n")


def test_builtins():
    assert builtin("z/5").order == 5
    assert builtin("heisenberg27").order == 27
    assert builtin("z9_semidirect_s3").order == 54
    with pytest.raises(BadParameter):
        builtin("nope")
    with pytest.raises(BadParameter):
        builtin("z/x")


def test_generating_set_generates(corpus_loop):
    _, L = corpus_loop
    assert generate_subloop(L, generating_set(L)).is_full


@st.composite
def small_groups(draw):
    kind = draw(st.sampled_from(["cyclic", "product"]))
    if kind == "cyclic":
        return make_cyclic(draw(st.integers(1, 12)))
    a, b = draw(st.integers(1, 5)), draw(st.integers(1, 5))
    return direct_product(make_cyclic(a), make_cyclic(b))


@given(small_groups(), st.data())
@settings(max_examples=40, deadline=None)
def test_group_laws_hold(G, data):
    assert is_group(G)
    assert is_commutative(G)
    x = data.draw(st.integers(0, G.order - 1))
    y = data.draw(st.integers(0, G.order - 1))
    assert G.mul(G.ldiv(x, y), 0) == G.ldiv(x, y)
    assert G.mul(x, G.ldiv(x, y)) == y


@given(st.permutations(list(range(1, 6))))
@settings(max_examples=30, deadline=None)
def test_relabelled_table_is_isomorphic(perm):
    L = make_cyclic(6)
    p = np.array([0] + list(perm))
    inv = np.argsort(p)
    T = p[L.table[inv[:, None], inv[None, :]]]
    M = validate_loop(T)
    assert are_isomorphic(L, M)
