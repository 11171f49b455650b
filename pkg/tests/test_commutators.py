import numpy as np
import pytest

from conftest import load
from nilfold.commutators import (
    birkhoff_reflection,
    central_factorization,
    commutator_subgroup,
    connecting_map,
    cooperates,
    gamma,
    huq_commutator,
    huq_commutator_oracle,
    is_central_extension,
    lower_central_series,
    nilpotency_class,
    tower_report,
)
from nilfold.errors import NotNormal, NotSurjective
from nilfold.loopcore import Homomorphism, are_isomorphic, identity_hom, make_cyclic, make_elementary_abelian, make_s3
from nilfold.substructure import NormalSubloop, SubSet, all_normal_subloops, centre, generate_subloop, quotient


def test_cooperates_examples():
    Q8 = load("Q8")
    O = load("O16")
    assert cooperates(Q8, [0], SubSet.full(Q8).mask)
    i, j = Q8.names.index("i"), Q8.names.index("j")
    c = cooperates(Q8, generate_subloop(Q8, [i]), generate_subloop(Q8, [j]))
    assert not c
    a1, b1, a2, b2 = c.witness
    T = Q8.table
    assert T[T[a1, b1], T[a2, b2]] != T[T[a1, a2], T[b1, b2]]
    assert cooperates(O, [0, 1], SubSet.full(O).mask)


def test_huq_examples():
    O = load("O16")
    full = SubSet.full(O)
    assert huq_commutator(make_cyclic(6), SubSet.full(make_cyclic(6)), SubSet.full(make_cyclic(6))).is_trivial
    assert huq_commutator(O, full, full).elements == [0, 1]
    assert huq_commutator(O, full, NormalSubloop.of(O, [0, 1])).is_trivial


def test_huq_needs_normal_arguments():
    S3 = make_s3()
    with pytest.raises(NotNormal):
        huq_commutator(S3, SubSet.full(S3), SubSet.of(S3, [0, 1]))


def test_huq_symmetric_and_monotone(corpus_loop):
    _, L = corpus_loop
    lat = all_normal_subloops(L)
    sub = lat if len(lat) <= 8 else lat[:: max(1, len(lat) // 6)]
    for A in sub:
        for B in sub:
            H = huq_commutator(L, A, B)
            assert H == huq_commutator(L, B, A)
            for A2 in sub:
                if A <= A2:
                    assert H <= huq_commutator(L, A2, B)


def test_huq_matches_group_commutators(corpus_group):
    _, G = corpus_group
    full = SubSet.full(G)
    assert huq_commutator(G, full, full) == commutator_subgroup(G)


def test_huq_oracle_small():
    for name in ("S3", "Q8", "D4"):
        L = load(name)
        lat = all_normal_subloops(L)
        for A in lat:
            for B in lat:
                assert huq_commutator(L, A, B) == huq_commutator_oracle(L, A, B, lat)


def test_central_extension_examples():
    O = load("O16")
    assert is_central_extension(identity_hom(O))
    _, pi = quotient(O, centre(O))
    assert is_central_extension(pi)
    Q8 = load("Q8")
    i = Q8.names.index("i")
    _, q = quotient(Q8, generate_subloop(Q8, [i]))
    assert not is_central_extension(q)


def test_central_extension_needs_surjection():
    Z2, Z4 = make_cyclic(2), make_cyclic(4)
    with pytest.raises(NotSurjective):
        is_central_extension(Homomorphism(Z2, Z4, [0, 2]))


def test_central_factorization():
    Q8 = load("Q8")
    O = load("O16")
    one = make_cyclic(1)
    for L, expect in ((Q8, make_elementary_abelian(2, 2)), (O, make_elementary_abelian(2, 3))):
        f = Homomorphism(L, one, np.zeros(L.order, dtype=np.int64))
        eta, zeta = central_factorization(f)
        assert are_isomorphic(eta.target, expect)
        assert np.array_equal(zeta.map[eta.map], f.map)
        assert is_central_extension(zeta)
    # already central: eta is an isomorphism
    _, pi = quotient(O, centre(O))
    eta, zeta = central_factorization(pi)
    assert eta.is_isomorphism


def test_class_examples():
    assert nilpotency_class(make_cyclic(1)) == 0
    assert nilpotency_class(load("O16")) == 2
    assert nilpotency_class(make_s3()) is None
    assert [g.order for g in lower_central_series(make_s3())] == [6, 3, 3]
    assert nilpotency_class(load("D8")) == 3
    assert nilpotency_class(load("Heis27")) == 2
    assert nilpotency_class(load("Z/5")) == 1


def test_birkhoff_examples():
    O = load("O16")
    assert birkhoff_reflection(O, 0)[0].order == 1
    assert are_isomorphic(birkhoff_reflection(O, 1)[0], make_elementary_abelian(2, 3))
    I2, eta = birkhoff_reflection(O, 2)
    assert eta.is_isomorphism


def test_units_compose(corpus_loop):
    _, L = corpus_loop
    for n in range(3):
        _, e0 = birkhoff_reflection(L, n)
        _, e1 = birkhoff_reflection(L, n + 1)
        conn = connecting_map(L, n)
        assert np.array_equal(conn.map[e1.map], e0.map)


def test_tower_report(corpus_loop):
    _, L = corpus_loop
    rep = tower_report(L, 3)
    assert [s.n for s in rep.stages] == [0, 1, 2, 3]
    assert all(s.connecting_central for s in rep.stages)
    d = rep.as_dict()
    assert d["order"] == L.order


def test_gamma_indexing():
    with pytest.raises(ValueError):
        gamma(make_s3(), 0)
    assert gamma(make_s3(), 1).is_full
