"""Groups with triality and their reflection.

A triality datum is a split epimorphism p: G -> S3 with section i.  An
element of G is *special* when it is conjugate to i(t) for a transposition
t.  The datum is a triality group when (gh)^3 = 1 for all special g, h with
p(g) != p(h).  S3 uses the pinned ordering id, (12), (13), (23), (123),
(132), composed as (st)(x) = s(t(x)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, NotAGroup, NotSurjective, SectionCollapse, ValidationError
from .loopcore import (
    Check,
    FiniteLoop,
    Homomorphism,
    S3_NAMES,
    direct_product,
    identity_hom,
    is_group,
    make_cyclic,
    make_cyclic_semidirect_s3,
    make_s3,
    parse_table_lines,
    format_table,
)
from .substructure import SubSet, normal_closure, quotient

TRANSPOSITIONS = (1, 2, 3)
_S3 = make_s3()


class TrialityDatum:
    """G with p: G -> S3 and i: S3 -> G such that p o i = id."""

    def __init__(self, G: FiniteLoop, p, i):
        if not is_group(G):
            raise NotAGroup("triality data need a group")
        self.G = G
        self.p = p if isinstance(p, Homomorphism) else Homomorphism(G, _S3, p)
        self.i = i if isinstance(i, Homomorphism) else Homomorphism(_S3, G, i)
        if not self.p.is_surjective:
            raise NotSurjective("p is not onto S3")
        if not np.array_equal(self.p.map[self.i.map], np.arange(6)):
            raise BadParameter("p o i is not the identity of S3")

    @property
    def order(self):
        return self.G.order

    def __repr__(self):
        return f"TrialityDatum(order={self.G.order})"


def trivial_datum() -> TrialityDatum:
    """S3 itself with p = i = id."""
    return TrialityDatum(_S3, np.arange(6), np.arange(6))


def semidirect_datum(m: int) -> TrialityDatum:
    """Z/m x| S3 with the projection and the canonical section."""
    G = make_cyclic_semidirect_s3(m)
    return TrialityDatum(G, np.arange(G.order) % 6, np.arange(6))


def s3_times_z2_datum() -> TrialityDatum:
    """S3 x Z/2 with the first projection and s -> (s, 0)."""
    G = direct_product(_S3, make_cyclic(2))
    return TrialityDatum(G, np.arange(12) // 2, 2 * np.arange(6))


def special_elements(d: TrialityDatum) -> SubSet:
    """All conjugates of the images of the transpositions."""
    G = d.G
    g = np.arange(G.order)[:, None]
    t = d.i.map[list(TRANSPOSITIONS)][None, :]
    conj = G.table[G.table[g, t], G.inverse(g)]
    return SubSet(G, np.unique(conj))


def _violations(d: TrialityDatum):
    """Pairs (g, h) of special elements with p(g) != p(h), and (gh)^3."""
    G = d.G
    s = np.asarray(special_elements(d).elements, dtype=np.int64)
    g = np.repeat(s, s.size)
    h = np.tile(s, s.size)
    keep = d.p.map[g] != d.p.map[h]
    g, h = g[keep], h[keep]
    gh = G.table[g, h]
    cube = G.table[G.table[gh, gh], gh]
    bad = cube != 0
    return g[bad], h[bad], cube[bad]


def is_triality_group(d: TrialityDatum) -> Check:
    """(gh)^3 = 1 for special g, h with p(g) != p(h); witness (g, h)."""
    g, h, _ = _violations(d)
    if g.size:
        return Check(False, (int(g[0]), int(h[0])))
    return Check(True)


@dataclass
class Reflection:
    datum: TrialityDatum
    projection: Homomorphism  # original G -> reflected G
    rounds: int


def reflect_to_triality(d: TrialityDatum) -> Reflection:
    """Quotient by the normal closure of the violating cubes until the
    axiom holds; quotients can create new special elements, so iterate.

    The cubes lie in the kernel of p, so p and i descend; SectionCollapse
    is raised should the section ever stop being injective.
    """
    proj = identity_hom(d.G)
    rounds = 0
    while True:
        _, _, cubes = _violations(d)
        if cubes.size == 0:
            return Reflection(d, proj, rounds)
        N = normal_closure(d.G, np.unique(cubes))
        Q, pi = quotient(d.G, N)
        pmap = np.empty(Q.order, dtype=np.int64)
        pmap[pi.map] = d.p.map
        if not np.array_equal(pmap[pi.map], d.p.map):
            raise AssertionError("p does not descend to the quotient")
        imap = pi.map[d.i.map]
        if np.unique(imap).size != 6:
            raise SectionCollapse("the reflection identified elements of the S3 section")
        d = TrialityDatum(Q, pmap, imap)
        proj = proj.then(pi)
        rounds += 1


# ---------------------------------------------------------------------------
# datum files


def format_datum(d: TrialityDatum) -> str:
    return (
        format_table(d.G)
        + " ".join(str(int(v)) for v in d.p.map)
        + "\n"
        + " ".join(str(int(v)) for v in d.i.map)
        + "\n"
    )


def parse_datum(text: str) -> TrialityDatum:
    """Table of G, then a line with p (one S3 index per element of G), then
    a line with i (six indices into G, in the pinned S3 order)."""
    G, rest = parse_table_lines(text.splitlines())
    if len(rest) != 2:
        raise ValidationError("datum needs exactly two lines after the table: p and i")
    try:
        p = [int(v) for v in rest[0].split()]
        i = [int(v) for v in rest[1].split()]
    except ValueError:
        raise ValidationError("p and i must be integer lines") from None
    if len(p) != G.order or len(i) != 6:
        raise ValidationError(f"p needs {G.order} entries and i needs 6")
    if min(p) < 0 or max(p) > 5 or min(i) < 0 or max(i) >= G.order:
        raise ValidationError("index out of range in p or i")
    return TrialityDatum(G, p, i)


DATUM_BUILTINS = {
    "s3": trivial_datum,
    "s3xz2": s3_times_z2_datum,
    "z3_semidirect_s3": lambda: semidirect_datum(3),
    "z9_semidirect_s3": lambda: semidirect_datum(9),
}

__all__ = [
    "S3_NAMES",
    "TrialityDatum",
    "Reflection",
    "special_elements",
    "is_triality_group",
    "reflect_to_triality",
    "format_datum",
    "parse_datum",
    "trivial_datum",
    "semidirect_datum",
    "s3_times_z2_datum",
]
