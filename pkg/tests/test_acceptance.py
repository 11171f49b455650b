"""Acceptance criteria; each test prints exactly one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also collected into the terminal summary.
"""
import itertools

import numpy as np

from conftest import ABELIAN, CORPUS, GROUPS, load, record_acceptance
from nilfold.commutators import connecting_map, gamma, huq_commutator, huq_commutator_oracle, is_central_extension
from nilfold.commutators import lower_central_series, nilpotency_class
from nilfold.higgins import fold_class, higgins_lower, higgins_sandwich, higgins_upper, is_n_folded
from nilfold.loopcore import find_isomorphism, make_cyclic, make_elementary_abelian, make_heisenberg
from nilfold.nilsum import coproduct2, cosmash2, cr3_report, universal_property_holds
from nilfold.substructure import all_normal_subloops, centre, quotient
from nilfold.triality import is_triality_group, reflect_to_triality, s3_times_z2_datum, semidirect_datum, trivial_datum


def report(k, title, failures):
    line = f"{'PASS' if not failures else 'FAIL'} criterion {k}: {title}"
    if failures:
        line += " -- " + "; ".join(failures[:5])
    print(line)
    record_acceptance(line)
    assert not failures, line


def test_criterion_1_o16_separation():
    O = load("O16")
    bad = []
    if nilpotency_class(O) != 2:
        bad.append(f"class {nilpotency_class(O)}")
    s = higgins_sandwich(O, 2, 4)
    if not (s.exact and s.upper.elements == [0, 1]):
        bad.append(f"sandwich {s.lower.describe()} .. {s.upper.describe()}")
    if is_n_folded(O, 2, 4) != "no":
        bad.append("is_n_folded(O16, 2) is not 'no'")
    Z = centre(O)
    if Z.elements != [0, 1]:
        bad.append(f"centre {Z.describe()}")
    Q, _ = quotient(O, Z)
    if find_isomorphism(Q, make_elementary_abelian(2, 3)) is None:
        bad.append("O16/centre is not (Z/2)^3")
    report(1, "O16 is 2-nilpotent, H3 = {+-1} exactly, not 2-folded, O16/Z = (Z/2)^3", bad)


def test_criterion_2_group_homogeneity():
    bad = []
    for name in sorted(GROUPS):
        L = load(name)
        low = higgins_lower(L, 2, 4)
        g3 = gamma(L, 3)
        up = higgins_upper(L, 2).subloop
        if not (low == g3 == up):
            bad.append(f"{name}: {low.describe()} / {g3.describe()} / {up.describe()}")
    report(2, "higgins_lower(L,2,4) = [L,[L,L]] = higgins_upper(L,2) on all corpus groups", bad)


def test_criterion_3_one_folded_iff_abelian():
    bad = []
    for name in sorted(CORPUS):
        L = load(name)
        fc = fold_class(L, 3)
        if L.order == 1:
            continue
        if name in ABELIAN:
            if fc.value() != 1:
                bad.append(f"{name}: {fc}")
        elif fc.lower <= 1:
            bad.append(f"{name}: {fc}")
    report(3, "fold class is 1 exactly for the nontrivial abelian members", bad)


def test_criterion_4_gamma_inside_higgins_upper():
    bad = []
    for name in sorted(CORPUS):
        L = load(name)
        for n in range(4):
            if not gamma(L, n + 1) <= higgins_upper(L, n).subloop:
                bad.append(f"{name} n={n}")
    report(4, "gamma_{n+1}(L) is inside higgins_upper(L,n) for n <= 3", bad)


def test_criterion_5_quadraticity_of_nil2():
    objs = {"1": make_cyclic(1), "Z/3": make_cyclic(3), "(Z/3)^2": make_elementary_abelian(3, 2)}
    targets = [make_cyclic(1), make_cyclic(3), make_elementary_abelian(3, 2), make_elementary_abelian(3, 3), make_heisenberg(3)]
    bad = []
    for (nx, X), (ny, Y), (nz, Z) in itertools.product(objs.items(), repeat=3):
        r = cr3_report(X, Y, Z, 3)
        if not (r.theta3_bijective and r.cr3_order == 1):
            bad.append(f"theta3 on ({nx},{ny},{nz}): {r}")
    for (nx, X), (ny, Y) in itertools.product(objs.items(), repeat=2):
        cop = coproduct2(X, Y, 3)
        if cop.order != X.order * Y.order * cosmash2(X, Y, 3).order:
            bad.append(f"order identity ({nx},{ny})")
        for T in targets:
            if not universal_property_holds(cop, T):
                bad.append(f"universal property ({nx},{ny}) -> order {T.order}")
    report(5, "theta3 bijective, cr3 = 1, |X+Y| = |X||Y||cr2|, sums universal in N(2,3)", bad)


def test_criterion_6_tower_is_central():
    bad = []
    for name in sorted(CORPUS):
        L = load(name)
        c = nilpotency_class(L)
        top = c if c is not None else len(lower_central_series(L))
        for n in range(top):
            if not is_central_extension(connecting_map(L, n)):
                bad.append(f"{name} n={n}")
    report(6, "each connecting map I^{n+1} -> I^n is a central extension", bad)


def test_criterion_7_huq_oracle():
    bad = []
    for name in sorted(CORPUS):
        L = load(name)
        if L.order > 16:
            continue
        lat = all_normal_subloops(L)
        for A in lat:
            for B in lat:
                if huq_commutator(L, A, B) != huq_commutator_oracle(L, A, B, lat):
                    bad.append(f"{name}: [{A.describe()}, {B.describe()}]")
    report(7, "huq_commutator equals the lattice minimum for loops of order <= 16", bad)


def test_criterion_8_triality():
    bad = []
    for label, d in (("S3", trivial_datum()), ("S3 x Z/2", s3_times_z2_datum()), ("Z/3 x| S3", semidirect_datum(3))):
        if not is_triality_group(d):
            bad.append(f"{label} rejected")
    d9 = semidirect_datum(9)
    chk = is_triality_group(d9)
    if chk or chk.witness is None:
        bad.append("Z/9 x| S3 accepted or no witness")
    else:
        g, h = chk.witness
        if d9.G.power(d9.G.mul(g, h), 3) == 0:
            bad.append("witness does not violate the axiom")
    r = reflect_to_triality(d9)
    if r.datum.order != 18 or not is_triality_group(r.datum):
        bad.append(f"reflection has order {r.datum.order}")
    again = reflect_to_triality(r.datum)
    if again.rounds != 0 or not np.array_equal(again.projection.map, np.arange(r.datum.order)):
        bad.append("reflection not idempotent")
    report(8, "triality checker and reflection Z/9 x| S3 -> order 18", bad)


if __name__ == "__main__":
    for k, v in list(globals().items()):
        if k.startswith("test_criterion"):
            try:
                v()
            except AssertionError:
                pass
