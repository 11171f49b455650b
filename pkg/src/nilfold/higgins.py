"""Higgins commutators of length n+1.

Lower bound
    An element w is (n+1)-reducible when some term v over n+1 tagged copies
    of L folds to w while each contraction of v (the copy-i leaves replaced
    by the identity) is trivial in the n-fold sum.  Triviality in the sum is
    stronger than triviality after folding into L, so witnesses are built
    from closure rules that keep every contraction trivial:

      * a leaf of copy c vanishes when c is killed;
      * loop operations applied to witnesses over the same copy set;
      * the commutator (ab)/(ba) and associator ((ab)c)/(a(bc)) of witnesses
        over disjoint copy sets vanish when any argument does;
      * merging two copies of a witness gives a witness over fewer copies.

    Copies are interchangeable, so the search tracks for each m <= n+1 the
    elements reachable by a witness over m copies together with its least
    depth.  Witnesses are replayed independently by :func:`verify_witness`,
    which reduces each contraction symbolically in the sum.

Upper bound
    The least normal N such that L/N is a group of nilpotency class <= n
    (an abelian group is the special case).  For groups the Higgins and
    iterated Huq commutators agree, and the image of a Higgins commutator
    under a surjection is again one, so H_{n+1}(L) lies inside N.
"""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .commutators import gamma, nilpotency_class
from .errors import BudgetExceeded, InexactSandwich, NotAGroup, ValidationError
from .loopcore import FiniteLoop, Homomorphism, is_abelian_group, is_group
from .substructure import NormalSubloop, SubSet, all_normal_subloops, normal_closure, quotient

DEFAULT_DEPTH = 4
DEFAULT_BUDGET = 10**7
OPS = ("mul", "ldiv", "rdiv")


# ---------------------------------------------------------------------------
# tagged terms


@dataclass(frozen=True)
class Leaf:
    copy: int  # 1-based
    element: int


@dataclass(frozen=True)
class Node:
    op: str
    left: "Term"
    right: "Term"


Term = Union[Leaf, Node]


def _table(L, op):
    return {"mul": L.table, "ldiv": L.ldiv_table, "rdiv": L.rdiv_table}[op]


def evaluate(L: FiniteLoop, term: Term, kill: int | None = None) -> int:
    """Value of ``term`` folded into L; leaves of copy ``kill`` become 1."""
    if isinstance(term, Leaf):
        return 0 if term.copy == kill else term.element
    a = evaluate(L, term.left, kill)
    b = evaluate(L, term.right, kill)
    return int(_table(L, term.op)[a, b])


def term_depth(term: Term) -> int:
    if isinstance(term, Leaf):
        return 0
    return 1 + max(term_depth(term.left), term_depth(term.right))


def term_copies(term: Term) -> set[int]:
    if isinstance(term, Leaf):
        return {term.copy}
    return term_copies(term.left) | term_copies(term.right)


def relabel(term: Term, mapping: dict[int, int]) -> Term:
    if isinstance(term, Leaf):
        return Leaf(mapping.get(term.copy, term.copy), term.element)
    return Node(term.op, relabel(term.left, mapping), relabel(term.right, mapping))


def format_term(term: Term) -> str:
    """Prefix notation: leaves ``copy:element``, nodes ``(op left right)``."""
    if isinstance(term, Leaf):
        return f"{term.copy}:{term.element}"
    return f"({term.op} {format_term(term.left)} {format_term(term.right)})"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse_term(text: str) -> Term:
    tokens = _TOKEN.findall(text)
    pos = 0

    def parse():
        nonlocal pos
        if pos >= len(tokens):
            raise ValidationError("unexpected end of term")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens) or tokens[pos] not in OPS:
                raise ValidationError(f"unknown operation in term near token {pos}")
            op = tokens[pos]
            pos += 1
            left = parse()
            right = parse()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValidationError("expected ')'")
            pos += 1
            return Node(op, left, right)
        m = re.fullmatch(r"(\d+):(\d+)", tok)
        if not m:
            raise ValidationError(f"bad leaf {tok!r}")
        return Leaf(int(m.group(1)), int(m.group(2)))

    term = parse()
    if pos != len(tokens):
        raise ValidationError("trailing tokens after term")
    return term


# ---------------------------------------------------------------------------
# symbolic evaluation in the sum of copies

ONE = ("one",)


def _combine(L, op, a, b):
    # single-copy subterms are computed inside that copy of L
    if a[0] == "leaf" and b[0] == "leaf" and a[1] == b[1]:
        v = int(_table(L, op)[a[2], b[2]])
        return ONE if v == 0 else ("leaf", a[1], v)
    if op == "mul":
        if a == ONE:
            return b
        if b == ONE:
            return a
        if b[0] == "ldiv" and b[1] == a:  # x (x \ y) = y
            return b[2]
        if a[0] == "rdiv" and a[2] == b:  # (y / x) x = y
            return a[1]
    elif op == "ldiv":
        if a == ONE:
            return b
        if a == b:
            return ONE
        if b[0] == "mul" and b[1] == a:  # x \ (x y) = y
            return b[2]
        if a[0] == "rdiv" and a[1] == b:  # (x / y) \ x = y
            return a[2]
    else:
        if b == ONE:
            return a
        if a == b:
            return ONE
        if a[0] == "mul" and a[2] == b:  # (y x) / x = y
            return a[1]
        if b[0] == "ldiv" and b[2] == a:  # x / (y \ x) = y
            return b[1]
    return (op, a, b)


def reduce_in_sum(L: FiniteLoop, term: Term, kill: int | None = None):
    """Normal form of ``term`` in the sum of copies of L, with copy ``kill``
    sent to 1.

    Subterms inside one copy are evaluated in L; otherwise only loop
    identities are applied, so a result of ``ONE`` proves the term is
    trivial in the sum (the converse need not hold).
    """
    if isinstance(term, Leaf):
        if term.copy == kill or term.element == 0:
            return ONE
        return ("leaf", term.copy, term.element)
    return _combine(L, term.op, reduce_in_sum(L, term.left, kill), reduce_in_sum(L, term.right, kill))


def verify_witness(L: FiniteLoop, n: int, element: int, term: Term) -> bool:
    """Replay a witness: it uses only copies 1..n+1, folds to ``element``,
    and each of its n+1 contractions reduces to 1 in the sum."""
    if not term_copies(term) <= set(range(1, n + 2)):
        return False
    if evaluate(L, term) != element:
        return False
    return all(reduce_in_sum(L, term, kill=i) == ONE for i in range(1, n + 2))


# ---------------------------------------------------------------------------
# witness search


@dataclass
class ReducibleSearch:
    """Outcome of the witness search for one length n+1."""

    loop: FiniteLoop
    n: int
    depth: int
    elements: SubSet
    witnesses: dict[int, Term]
    evaluations: int

    def verify(self) -> bool:
        return all(verify_witness(self.loop, self.n, w, t) for w, t in self.witnesses.items())


def _commutator(a, b):
    return Node("rdiv", Node("mul", a, b), Node("mul", b, a))


def _associator(a, b, c):
    return Node("rdiv", Node("mul", Node("mul", a, b), c), Node("mul", a, Node("mul", b, c)))


class _WitnessTable:
    """For each copy count m, least depth and provenance of every element."""

    def __init__(self, order, k):
        self.depth = np.full((k + 1, order), -1, dtype=np.int64)
        self.how = {}

    def offer(self, m, values, d, make):
        """Record ``values`` at depth d where not known; ``make(i)`` gives
        the provenance of values[i]."""
        row = self.depth[m]
        fresh, first = np.unique(values, return_index=True)
        keep = row[fresh] < 0
        for v, i in zip(fresh[keep], first[keep]):
            row[v] = d
            self.how[(m, int(v))] = make(int(i))
        return int(keep.sum())

    def at_most(self, m, d):
        return np.flatnonzero((self.depth[m] >= 0) & (self.depth[m] <= d))

    def exactly(self, m, d):
        return np.flatnonzero(self.depth[m] == d)


def _build(tab, m, v, offset=0) -> Term:
    """Witness term for element v over copies offset+1 .. offset+m."""
    how = tab.how[(m, v)]
    kind = how[0]
    if kind == "leaf":
        return Leaf(offset + 1, v)
    if kind == "op":
        _, op, a, b = how
        return Node(op, _build(tab, m, a, offset), _build(tab, m, b, offset))
    if kind == "comm":
        _, i, a, j, b = how
        return _commutator(_build(tab, i, a, offset), _build(tab, j, b, offset + i))
    if kind == "assoc":
        _, i, a, j, b, l, c = how
        return _associator(
            _build(tab, i, a, offset), _build(tab, j, b, offset + i), _build(tab, l, c, offset + i + j)
        )
    # merge: witness over m+1 copies with the last two identified
    term = _build(tab, m + 1, v, offset)
    return relabel(term, {offset + m + 1: offset + m})


def find_reducible(
    L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET
) -> ReducibleSearch:
    """Elements with a reducibility witness of depth <= ``depth`` over n+1
    copies.  ``budget`` caps the number of element combinations tried;
    BudgetExceeded carries the result of the last completed depth."""
    if n < 0 or depth < 0:
        raise ValueError("n and depth must be non-negative")
    k = n + 1
    N = L.order
    tab = _WitnessTable(N, k)
    tab.offer(1, np.arange(N), 0, lambda i: ("leaf",))
    evaluations = 0
    reached = 0
    T = {op: _table(L, op) for op in OPS}

    def result(d):
        elems = tab.at_most(k, d)
        witnesses = {int(v): _build(tab, k, int(v)) for v in elems}
        return ReducibleSearch(L, n, d, SubSet(L, elems), witnesses, evaluations)

    for d in range(1, depth + 1):
        plans = []
        # loop operations inside one copy count: one argument at depth d-1
        for m in range(1, k + 1):
            new = tab.exactly(m, d - 1)
            old = tab.at_most(m, d - 1)
            if new.size:
                plans.append(("op", m, new, old))
        # commutators of depth d: arguments at depth <= d-2, one at d-2
        if d >= 2:
            for i in range(1, k):
                for j in range(1, k - i + 1):
                    plans.append(("comm", i, j))
        if d >= 3:
            for i in range(1, k):
                for j in range(1, k - i):
                    for l in range(1, k - i - j + 1):
                        plans.append(("assoc", i, j, l))

        cost = 0
        for p in plans:
            if p[0] == "op":
                cost += 2 * len(OPS) * p[2].size * p[3].size
            elif p[0] == "comm":
                cost += tab.at_most(p[1], d - 2).size * tab.at_most(p[2], d - 2).size
            else:
                cost += tab.at_most(p[1], d - 3).size * tab.at_most(p[2], d - 3).size * tab.at_most(p[3], d - 3).size
        if evaluations + cost > budget:
            raise BudgetExceeded(
                f"depth {d} needs {cost} evaluations, {budget - evaluations} left",
                partial=result(reached),
                depth_reached=reached,
            )
        evaluations += cost

        produced = []
        for p in plans:
            if p[0] == "op":
                _, m, new, old = p
                for op in OPS:
                    for left, right in ((new, old), (old, new)):
                        vals = T[op][left[:, None], right[None, :]].ravel()
                        produced.append((m, vals, lambda i, op=op, left=left, right=right: (
                            "op", op, int(left[i // right.size]), int(right[i % right.size]))))
            elif p[0] == "comm":
                _, i, j = p
                a = tab.at_most(i, d - 2)
                b = tab.at_most(j, d - 2)
                ab = T["mul"][a[:, None], b[None, :]]
                ba = T["mul"][b[None, :], a[:, None]]
                vals = T["rdiv"][ab, ba].ravel()
                produced.append((i + j, vals, lambda x, i=i, j=j, a=a, b=b: (
                    "comm", i, int(a[x // b.size]), j, int(b[x % b.size]))))
            else:
                _, i, j, l = p
                a = tab.at_most(i, d - 3)
                b = tab.at_most(j, d - 3)
                c = tab.at_most(l, d - 3)
                M = T["mul"]
                A, B, C = a[:, None, None], b[None, :, None], c[None, None, :]
                vals = T["rdiv"][M[M[A, B], C], M[A, M[B, C]]].ravel()
                bc = b.size * c.size
                produced.append((i + j + l, vals, lambda x, i=i, j=j, l=l, a=a, b=b, c=c, bc=bc: (
                    "assoc", i, int(a[x // bc]), j, int(b[(x % bc) // c.size]), l, int(c[x % c.size]))))
        for m, vals, make in produced:
            tab.offer(m, vals, d, make)
        # merging copies: a witness over m+1 copies is one over m copies
        for m in range(k - 1, 0, -1):
            vals = tab.exactly(m + 1, d)
            tab.offer(m, vals, d, lambda i: ("merge",))
        reached = d
    return result(reached)


def reducible_elements(L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> SubSet:
    """(n+1)-reducible elements witnessed by terms of depth <= ``depth``."""
    return find_reducible(L, n, depth, budget).elements


def higgins_lower(L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> NormalSubloop:
    """Normal closure of the reducible elements: a subloop of H_{n+1}(L)."""
    return normal_closure(L, reducible_elements(L, n, depth, budget))


# ---------------------------------------------------------------------------
# upper bound


@dataclass
class UpperBound:
    subloop: NormalSubloop
    certificate: str

    def describe(self):
        return f"{self.certificate}: quotient by {self.subloop.describe()}"


def _vanishing_certificate(Q: FiniteLoop, n: int) -> str | None:
    if Q.order > 64 or not is_group(Q):
        return None
    if is_abelian_group(Q):
        return "abelian-group-quotient"
    c = nilpotency_class(Q)
    if c is not None and c <= n:
        return f"group-quotient-of-class-{c}"
    return None


def higgins_upper(L: FiniteLoop, n: int, workers: int = 1) -> UpperBound:
    """Least N in the normal-subloop lattice with a vanishing certificate
    for length n+1 on L/N."""
    if n == 0:
        # the length-1 commutator is L itself
        return UpperBound(NormalSubloop.full(L), "length-one")
    lattice = all_normal_subloops(L)

    def certify(N):
        return _vanishing_certificate(quotient(L, N)[0], n)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            certs = list(ex.map(certify, lattice))
    else:
        certs = [certify(N) for N in lattice]
    good = [N for N, c in zip(lattice, certs) if c]
    # qualifying subloops are closed under intersection (L/(N & M) embeds
    # in L/N x L/M), so the least one is their intersection
    mask = np.logical_and.reduce([N.mask for N in good])
    least = next((N for N in good if np.array_equal(N.mask, mask)), None)
    if least is None:
        raise AssertionError("certified normal subloops are not closed under intersection")
    return UpperBound(least, certify(least))


# ---------------------------------------------------------------------------
# sandwich and foldedness


@dataclass
class SandwichResult:
    length: int
    lower: NormalSubloop
    upper: NormalSubloop
    exact: bool
    lower_depth: int
    upper_certificate: str
    witnesses: dict[int, Term] = field(default_factory=dict)
    evaluations: int = 0

    def as_dict(self):
        L = self.lower.parent
        return {
            "length": self.length,
            "lower": self.lower.elements,
            "lower_names": [L.name(x) for x in self.lower.elements],
            "upper": self.upper.elements,
            "upper_names": [L.name(x) for x in self.upper.elements],
            "exact": self.exact,
            "lower_depth": self.lower_depth,
            "evaluations": self.evaluations,
            "upper_certificate": self.upper_certificate,
            "witnesses": {str(w): format_term(t) for w, t in sorted(self.witnesses.items())},
        }


def higgins_sandwich(
    L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> SandwichResult:
    """Certified lower and upper bounds for H_{n+1}(L)."""
    search = find_reducible(L, n, depth, budget)
    if not search.verify():
        raise AssertionError("a reducibility witness failed to replay")
    lower = normal_closure(L, search.elements)
    up = higgins_upper(L, n, workers=workers)
    if not lower <= up.subloop:
        raise AssertionError("lower bound escapes the certified upper bound")
    witnesses = {w: t for w, t in search.witnesses.items() if w != 0}
    return SandwichResult(
        n + 1, lower, up.subloop, lower == up.subloop, search.depth, up.describe(), witnesses, search.evaluations
    )


def is_n_folded(L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> str:
    """'yes', 'no' or 'unknown'.

    The upper bound is tried first; the term search only runs when it is
    inconclusive.
    """
    if higgins_upper(L, n).subloop.is_trivial:
        return "yes"
    if not reducible_elements(L, n, depth, budget).is_trivial:
        return "no"
    return "unknown"


@dataclass
class FoldClass:
    """Interval ``lower <= fold class <= upper``; ``upper`` None if unbounded."""

    lower: int
    upper: int | None
    answers: dict[int, str]

    @property
    def exact(self):
        return self.upper is not None and self.lower == self.upper

    def value(self):
        return self.lower if self.exact else None


def fold_class(L: FiniteLoop, maxn: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET) -> FoldClass:
    """Least n with L n-folded, as a certified interval over 0..maxn."""
    answers = {}
    lower = 0
    upper = None
    for n in range(maxn + 1):
        a = is_n_folded(L, n, depth, budget)
        answers[n] = a
        if a == "no":
            lower = n + 1
        elif a == "yes":
            upper = n
            break
    return FoldClass(lower, upper, answers)


def group_higgins(L: FiniteLoop, n: int, cross_check_depth: int | None = None) -> NormalSubloop:
    """gamma_{n+1}(L), the Higgins commutator of length n+1 of a group.

    With ``cross_check_depth`` the term-search lower bound is computed too
    and must coincide.
    """
    if not is_group(L):
        raise NotAGroup("group_higgins needs an associative loop")
    g = gamma(L, n + 1)
    if cross_check_depth is not None:
        low = higgins_lower(L, n, cross_check_depth)
        if low != g:
            raise AssertionError(f"term search gave {low.describe()} but gamma_{n + 1} is {g.describe()}")
    return g


def folded_reflection(
    L: FiniteLoop, n: int, depth: int = DEFAULT_DEPTH, budget: int = DEFAULT_BUDGET
) -> tuple[FiniteLoop, Homomorphism]:
    """J^n(L) = L / H_{n+1}(L); refuses unless the sandwich is exact."""
    s = higgins_sandwich(L, n, depth, budget)
    if not s.exact:
        raise InexactSandwich(
            f"H_{n + 1} is only known between {s.lower.describe()} and {s.upper.describe()}"
        )
    return quotient(L, s.upper)
