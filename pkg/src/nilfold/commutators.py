"""Huq commutators, central extensions and the nilpotency tower.

Two normal subloops A, B *cooperate* when (a1 b1)(a2 b2) = (a1 a2)(b1 b2)
for all a1, a2 in A and b1, b2 in B, i.e. multiplication A x B -> L is a
homomorphism.  The Huq commutator [A, B] is the least normal N such that
the images of A and B cooperate in L/N.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotNormal, NotSurjective
from .loopcore import Check, FiniteLoop, Homomorphism
from .substructure import NormalSubloop, SubSet, as_mask, centre, is_normal, kernel, normal_closure, quotient

_CHUNK = 1 << 22


def _quadruples(L, A, B):
    """Yield (lhs, rhs, (a1, b1, a2, b2)) over all quadruples, chunked."""
    a = np.flatnonzero(as_mask(L, A))
    b = np.flatnonzero(as_mask(L, B))
    T = L.table
    # pairs (a1, b1) flattened; loop over a2 in blocks to bound memory
    a1 = np.repeat(a, b.size)
    b1 = np.tile(b, a.size)
    ab1 = T[a1, b1]
    step = max(1, _CHUNK // max(1, a1.size * b.size))
    for i in range(0, a.size, step):
        a2 = a[i : i + step]
        ab2 = T[a2[:, None], b[None, :]].ravel()
        a2r = np.repeat(a2, b.size)
        b2r = np.tile(b, a2.size)
        lhs = T[ab1[:, None], ab2[None, :]]
        rhs = T[T[a1[:, None], a2r[None, :]], T[b1[:, None], b2r[None, :]]]
        yield lhs, rhs, (a1, b1, a2r, b2r)


def cooperates(L: FiniteLoop, A, B) -> Check:
    """Whether A and B cooperate in L; witness is (a1, b1, a2, b2)."""
    for lhs, rhs, (a1, b1, a2, b2) in _quadruples(L, A, B):
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            i, j = bad[0]
            return Check(False, (int(a1[i]), int(b1[i]), int(a2[j]), int(b2[j])))
    return Check(True)


def cooperation_defects(L: FiniteLoop, A, B) -> np.ndarray:
    """Mask of defects lhs / rhs over all quadruples (right division)."""
    out = np.zeros(L.order, dtype=bool)
    for lhs, rhs, _ in _quadruples(L, A, B):
        out[L.rdiv(lhs, rhs).ravel()] = True
    return out


def huq_commutator(L: FiniteLoop, A, B) -> NormalSubloop:
    """Least normal subloop N such that A and B cooperate modulo N.

    Fixed-point iteration: collect the cooperation defects (lifted to L by
    right division), take the normal closure, and repeat in the quotient
    until A and B cooperate there.
    """
    for S in (A, B):
        if not is_normal(L, S):
            raise NotNormal("Huq commutator arguments must be normal subloops")
    A = as_mask(L, A)
    B = as_mask(L, B)
    N = NormalSubloop.trivial(L)
    while True:
        Q, pi = quotient(L, N)
        qa = np.zeros(Q.order, dtype=bool)
        qa[pi.map[A]] = True
        qb = np.zeros(Q.order, dtype=bool)
        qb[pi.map[B]] = True
        if cooperates(Q, qa, qb):
            return N
        grow = N.mask | cooperation_defects(L, A, B)
        nxt = normal_closure(L, grow)
        if nxt == N:
            raise AssertionError("defect iteration stalled")
        N = nxt


def huq_commutator_oracle(L: FiniteLoop, A, B, lattice) -> NormalSubloop:
    """Least member of ``lattice`` modulo which A and B cooperate.

    Checks cooperation directly in each quotient; exponential in general and
    only meant to cross-check :func:`huq_commutator`.
    """
    A = as_mask(L, A)
    B = as_mask(L, B)
    good = []
    for N in lattice:
        Q, pi = quotient(L, N)
        qa = np.zeros(Q.order, dtype=bool)
        qa[pi.map[A]] = True
        qb = np.zeros(Q.order, dtype=bool)
        qb[pi.map[B]] = True
        if cooperates(Q, qa, qb):
            good.append(N)
    least = min(good, key=SubSet.key)
    if not all(least <= N for N in good):
        raise AssertionError("cooperating normal subloops have no least element")
    return least


def _require_surjective(f):
    if not f.is_surjective:
        raise NotSurjective("homomorphism is not surjective")


def is_central_extension(f: Homomorphism) -> bool:
    """Surjection whose kernel cooperates with the whole source.

    Cross-checked against kernel inside the centre.
    """
    _require_surjective(f)
    L = f.source
    K = kernel(f)
    huq = huq_commutator(L, SubSet.full(L).mask, K)
    central = huq.is_trivial
    if central != K.issubset(centre(L)):
        raise AssertionError("Huq-centrality and centre containment disagree")
    return central


def central_factorization(f: Homomorphism) -> tuple[Homomorphism, Homomorphism]:
    """Factor a surjection f: X -> Y as X -> X/[X, K[f]] -> Y.

    The second factor is a central extension.
    """
    _require_surjective(f)
    X = f.source
    C = huq_commutator(X, SubSet.full(X).mask, kernel(f))
    Q, eta = quotient(X, C)
    zmap = np.empty(Q.order, dtype=np.int64)
    zmap[eta.map] = f.map
    zeta = Homomorphism(Q, f.target, zmap)
    if not is_central_extension(zeta):
        raise AssertionError("induced map is not central")
    return eta, zeta


def lower_central_series(L: FiniteLoop) -> list[NormalSubloop]:
    """gamma_1 = L, gamma_{k+1} = [L, gamma_k], up to stabilisation.

    The returned list ends with the first repeated term.
    """
    key = "lcs"
    if key in L._cache:
        return L._cache[key]
    full = NormalSubloop.full(L)
    series = [full]
    while True:
        nxt = huq_commutator(L, full.mask, series[-1])
        series.append(nxt)
        if nxt == series[-2]:
            break
    L._cache[key] = series
    return series


def gamma(L: FiniteLoop, k: int) -> NormalSubloop:
    """k-th term of the lower central series (gamma_1 = L)."""
    if k < 1:
        raise ValueError("gamma is indexed from 1")
    s = lower_central_series(L)
    return s[min(k, len(s)) - 1]


def nilpotency_class(L: FiniteLoop) -> int | None:
    """Least n with gamma_{n+1} trivial; None when L is not nilpotent."""
    s = lower_central_series(L)
    if not s[-1].is_trivial:
        return None
    for n, g in enumerate(s):
        if g.is_trivial:
            return n
    raise AssertionError("unreachable")


def birkhoff_reflection(L: FiniteLoop, n: int) -> tuple[FiniteLoop, Homomorphism]:
    """I^n(L) = L / gamma_{n+1}(L) with its unit."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return quotient(L, gamma(L, n + 1))


def connecting_map(L, n, units=None):
    """The induced surjection I^{n+1}(L) -> I^n(L)."""
    (Q1, e1) = units[n + 1] if units else birkhoff_reflection(L, n + 1)
    (Q0, e0) = units[n] if units else birkhoff_reflection(L, n)
    m = np.empty(Q1.order, dtype=np.int64)
    m[e1.map] = e0.map
    return Homomorphism(Q1, Q0, m)


@dataclass
class TowerStage:
    n: int
    order: int
    unit: Homomorphism
    connecting_central: bool  # I^{n+1} -> I^n is a central extension


@dataclass
class TowerReport:
    object: FiniteLoop
    stages: list[TowerStage] = field(default_factory=list)
    nil_class: int | None = None

    def as_dict(self):
        return {
            "order": self.object.order,
            "class": self.nil_class if self.nil_class is not None else "not nilpotent",
            "stages": [
                {"n": s.n, "order": s.order, "connecting_map_central": s.connecting_central}
                for s in self.stages
            ],
        }


def tower_report(L: FiniteLoop, maxn: int) -> TowerReport:
    """Stages I^0 .. I^maxn with central-extension flags on connecting maps."""
    units = {n: birkhoff_reflection(L, n) for n in range(maxn + 2)}
    rep = TowerReport(L, nil_class=nilpotency_class(L))
    for n in range(maxn + 1):
        Q, eta = units[n]
        conn = connecting_map(L, n, units)
        flag = is_central_extension(conn)
        rep.stages.append(TowerStage(n, Q.order, eta, flag))
    return rep


def commutator_subgroup(G: FiniteLoop) -> SubSet:
    """Group-theoretic derived subgroup generated by x y x^-1 y^-1.

    Independent of the Huq machinery; assumes G is a group.
    """
    from .substructure import generate_subloop

    inv = G.inverse(np.arange(G.order))
    T = G.table
    x = np.arange(G.order)[:, None]
    y = np.arange(G.order)[None, :]
    comm = T[T[T[x, y], inv[x]], inv[y]]
    return generate_subloop(G, np.unique(comm))

