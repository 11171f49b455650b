"""Sums, comparison maps and cross-effects in the variety N(2, p).

N(2, p) is the variety of groups of nilpotency class <= 2 and exponent p
(p an odd prime).  The sum X_1 + ... + X_r of members is modelled by normal
forms (x_1, ..., x_r, t) with x_i in X_i and, for every pair i < j, a
matrix t_ij over F_p indexed by bases of the abelianisations of X_i and X_j.
Multiplication is

    (x, t) * (x', t') = (x_i x'_i, t_ij + t'_ij - ab(x'_i) (x) ab(x_j)).

The cocycle is bilinear, hence associative; the model is only trusted after
its group laws and universal property have been checked.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .commutators import commutator_subgroup, gamma, nilpotency_class
from .errors import BadParameter, NilfoldError, NotInVariety, TooLarge
from .loopcore import FiniteLoop, direct_product, enumerate_homs, is_group
from .substructure import centre, quotient

EXHAUSTIVE_LIMIT = 3**6
MODEL_LIMIT = 1 << 40
_SAMPLES = 20000


def _is_prime(p):
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def check_variety(L: FiniteLoop, p: int) -> bool:
    """Group of exponent dividing p with central commutators."""
    if not is_group(L):
        return False
    x = np.arange(L.order)
    y = np.zeros(L.order, dtype=np.int64)
    for _ in range(p):
        y = L.table[y, x]
    if np.any(y != 0):
        return False
    return commutator_subgroup(L) <= centre(L)


def _require(L, p):
    if p % 2 == 0 or not _is_prime(p):
        raise BadParameter(f"p must be an odd prime, got {p}")
    if not check_variety(L, p):
        raise NotInVariety(f"loop of order {L.order} is not in N(2,{p})")


def abelianisation_coordinates(L: FiniteLoop, p: int) -> np.ndarray:
    """Coordinates over F_p of each element's image in L/[L,L].

    Returns an (order, rank) array; the basis is chosen greedily in index
    order so the result is deterministic.
    """
    Q, pi = quotient(L, gamma(L, 2))
    basis = []
    span = {0: ()}
    while len(span) < Q.order:
        g = next(q for q in range(Q.order) if q not in span)
        basis.append(g)
        span = {}
        for coeffs in itertools.product(range(p), repeat=len(basis)):
            v = 0
            for b, c in zip(basis, coeffs):
                v = int(Q.table[v, Q.power(b, c)])
            span[v] = coeffs
    if len(span) != p ** len(basis):
        raise NotInVariety("abelianisation is not elementary abelian")
    coords = np.array([span[q] if basis else () for q in range(Q.order)], dtype=np.int64)
    return coords.reshape(Q.order, len(basis))[pi.map]


class Class2Group:
    """Normal-form model of the sum of ``factors`` in N(2, p).

    Elements are integers (mixed radix over the x- and t-coordinates, with
    the identity at 0); :meth:`mul` and :meth:`inv` work on numpy arrays.
    """

    def __init__(self, factors: list[FiniteLoop], p: int):
        for X in factors:
            _require(X, p)
        self.factors = list(factors)
        self.p = p
        self.coords = [abelianisation_coordinates(X, p) for X in factors]
        self.ranks = [c.shape[1] for c in self.coords]
        self.pairs = [(i, j) for i in range(len(factors)) for j in range(i + 1, len(factors))]
        radices = [X.order for X in factors]
        for i, j in self.pairs:
            radices += [p] * (self.ranks[i] * self.ranks[j])
        self.radices = np.array(radices, dtype=np.int64)
        order = 1
        for r in radices:
            order *= int(r)
        if order > MODEL_LIMIT:
            raise TooLarge(f"model of order {order} is too large")
        self.order = order
        # most significant digit first
        self.weights = np.array(
            [int(np.prod(self.radices[k + 1 :], dtype=object)) for k in range(len(radices))], dtype=np.int64
        )
        self._loop = None
        self._t_slices = {}
        pos = len(factors)
        for i, j in self.pairs:
            size = self.ranks[i] * self.ranks[j]
            self._t_slices[(i, j)] = slice(pos, pos + size)
            pos += size

    @property
    def central_order(self):
        """Order of the t-part, the kernel of the projection to the product."""
        return self.p ** sum(self.ranks[i] * self.ranks[j] for i, j in self.pairs)

    def decode(self, g):
        g = np.asarray(g, dtype=np.int64)
        return (g[..., None] // self.weights) % self.radices

    def encode(self, digits):
        return (np.asarray(digits, dtype=np.int64) * self.weights).sum(axis=-1)

    def component(self, g, i):
        return (np.asarray(g, dtype=np.int64) // self.weights[i]) % self.radices[i]

    def mul(self, a, b):
        da = self.decode(a)
        db = self.decode(b)
        a_, b_ = np.broadcast_arrays(da, db)
        out = np.empty(a_.shape, dtype=np.int64)
        for i, X in enumerate(self.factors):
            out[..., i] = X.table[a_[..., i], b_[..., i]]
        for (i, j), sl in self._t_slices.items():
            ri, rj = self.ranks[i], self.ranks[j]
            xb = self.coords[i][b_[..., i]]  # second factor's i-coordinates
            ya = self.coords[j][a_[..., j]]  # first factor's j-coordinates
            outer = (xb[..., :, None] * ya[..., None, :]).reshape(a_.shape[:-1] + (ri * rj,))
            out[..., sl] = (a_[..., sl] + b_[..., sl] - outer) % self.p
        return self.encode(out)

    def power(self, g, k):
        y = np.zeros_like(np.asarray(g, dtype=np.int64))
        for _ in range(k):
            y = self.mul(y, g)
        return y

    def inv(self, g):
        return self.power(g, self.p - 1)

    def injection(self, i):
        """Indices of the image of factor i."""
        X = self.factors[i]
        d = np.zeros((X.order, len(self.radices)), dtype=np.int64)
        d[:, i] = np.arange(X.order)
        return self.encode(d)

    def generators(self):
        """Images of the factors' generating sets; they generate the model."""
        from .loopcore import generating_set

        gens = []
        for i, X in enumerate(self.factors):
            inj = self.injection(i)
            gens += [int(inj[g]) for g in generating_set(X)]
        return gens

    def elements(self):
        if self.order > 1 << 26:
            raise TooLarge("too many elements to list")
        return np.arange(self.order, dtype=np.int64)

    def to_loop(self) -> FiniteLoop:
        """Cayley table of the model (order <= 3^6 only)."""
        if self.order > EXHAUSTIVE_LIMIT:
            raise TooLarge(f"Cayley table of order {self.order} not built")
        if self._loop is None:
            e = np.arange(self.order)
            self._loop = FiniteLoop(self.mul(e[:, None], e[None, :]), _checked=False)
        return self._loop

    def verify(self, rng=None) -> str:
        """Check associativity, exponent p and central commutators.

        Exhaustive up to order 3^6 (on the Cayley table, associativity by
        Light's test over the generators), sampled with a fixed seed beyond.
        Returns ``"exhaustive"`` or ``"sampled"``; raises AssertionError on
        failure.
        """
        if self.order <= EXHAUSTIVE_LIMIT:
            T = self.to_loop().table
            for s in self.generators():
                if not np.array_equal(T[T, s], T[:, T[:, s]]):
                    raise AssertionError("model is not associative")
            e = np.arange(self.order)
            y = np.zeros(self.order, dtype=np.int64)
            for _ in range(self.p):
                y = T[y, e]
            if np.any(y != 0):
                raise AssertionError("model does not have exponent p")
            central = (T == T.T).all(axis=1)
            inv = np.argmin(T, axis=1)  # row x has its 0 in column x^-1
            comm = T[T[T[e[:, None], e[None, :]], inv[e][:, None]], inv[e][None, :]]
            if not central[comm].all():
                raise AssertionError("commutators are not central")
            return "exhaustive"
        rng = rng or np.random.default_rng(0)
        a, b, c = (rng.integers(0, self.order, _SAMPLES) for _ in range(3))
        if np.any(self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))):
            raise AssertionError("model is not associative")
        if np.any(self.power(a, self.p) != 0):
            raise AssertionError("model does not have exponent p")
        comm = self.mul(self.mul(a, b), self.inv(self.mul(b, a)))
        if np.any(self.mul(comm, c) != self.mul(c, comm)):
            raise AssertionError("commutators are not central")
        return "sampled"

    def __repr__(self):
        return f"Class2Group(orders={[X.order for X in self.factors]}, p={self.p}, order={self.order})"


@dataclass
class Coproduct:
    """X + Y with its injections and comparison map to X x Y."""

    group: Class2Group
    injections: list[np.ndarray]
    theta: np.ndarray  # element index -> index in direct_product(X, Y)
    product: FiniteLoop
    verification: str

    @property
    def order(self):
        return self.group.order


def coproduct2(X: FiniteLoop, Y: FiniteLoop, p: int) -> Coproduct:
    """The sum X + Y in N(2, p) with theta(x, y, t) = (x, y)."""
    G = Class2Group([X, Y], p)
    how = G.verify()
    e = G.elements()
    theta = G.component(e, 0) * Y.order + G.component(e, 1)
    return Coproduct(G, [G.injection(0), G.injection(1)], theta, direct_product(X, Y), how)


def theta_is_central_surjection(cop: Coproduct) -> bool:
    """theta is a surjective homomorphism whose kernel is central."""
    G = cop.group
    e = G.elements()
    P = cop.product
    if np.unique(cop.theta).size != P.order:
        return False
    for s in G.generators():
        if np.any(cop.theta[G.mul(e, s)] != P.table[cop.theta, cop.theta[s]]):
            return False
    ker = e[cop.theta == 0]
    return bool(np.all(G.mul(ker[:, None], e[None, :]) == G.mul(e[None, :], ker[:, None])))


@dataclass
class Subgroup:
    group: Class2Group
    members: np.ndarray

    @property
    def order(self):
        return int(self.members.size)

    @property
    def is_trivial(self):
        return self.order == 1


def cosmash2(X: FiniteLoop, Y: FiniteLoop, p: int) -> Subgroup:
    """X <> Y: the kernel of theta: X + Y -> X x Y, found by scanning."""
    cop = coproduct2(X, Y, p)
    e = cop.group.elements()
    return Subgroup(cop.group, e[cop.theta == 0])


# ---------------------------------------------------------------------------
# universal property


class TableModel:
    """A candidate sum given by a Cayley table, for use with
    :func:`universal_property_holds`."""

    def __init__(self, loop: FiniteLoop, factors):
        self.loop = loop
        self.factors = list(factors)
        self.order = loop.order

    def mul(self, a, b):
        return self.loop.table[a, b]

    def elements(self):
        return np.arange(self.order, dtype=np.int64)


def _extend(G, gens, images, T):
    """Values h(g) for all g, built along a BFS tree from generator images.

    ``images`` has shape (batch, len(gens)); the result has shape
    (batch, order).
    """
    order = G.order
    flat = T.table.ravel()
    h = np.full((images.shape[0], order), -1, dtype=np.int64)
    h[:, 0] = 0
    seen = np.zeros(order, dtype=bool)
    seen[0] = True
    layer = np.array([0], dtype=np.int64)
    while layer.size:
        nxt = []
        for k, s in enumerate(gens):
            prod = G.mul(layer, s)
            new = ~seen[prod]
            fresh, idx = np.unique(prod[new], return_index=True)
            if fresh.size:
                src = layer[new][idx]
                seen[fresh] = True
                h[:, fresh] = flat[h[:, src] * T.order + images[:, k][:, None]]
                nxt.append(fresh)
        layer = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)
    if not seen.all():
        raise AssertionError("injections do not generate the sum")
    return h


def _orbit_representatives(images, T, auts):
    """Indices of one row per orbit of ``auts`` acting on rows of ``images``.

    Rows are tuples of elements of T; an automorphism acts entrywise.  The
    automorphisms need not generate Aut(T): any set gives a sound reduction.
    """
    n, k = images.shape
    radix = T.order ** np.arange(k, dtype=np.int64)
    code = images @ radix
    where = np.full(T.order**k, -1, dtype=np.int64)
    where[code] = np.arange(n)
    perms = [where[a[images] @ radix] for a in auts]
    if any(np.any(p < 0) for p in perms):
        raise AssertionError("automorphism moved a homomorphism outside the list")
    label = np.arange(n)
    while True:
        old = label
        for p in perms:
            label = np.minimum(label, label[p])
            m = np.full(n, n, dtype=np.int64)
            np.minimum.at(m, p, label)
            label = np.minimum(label, m)
        label = label[label]
        if np.array_equal(label, old):
            return np.flatnonzero(label == np.arange(n))


def _automorphisms(T, count=6, seed=0, attempts=400):
    """Up to ``count`` automorphisms of T as index arrays, found by trying
    random generator images (fixed seed)."""
    from .loopcore import Homomorphism, _propagate, generating_set

    key = ("automorphisms", count, seed)
    if key in T._cache:
        return T._cache[key]
    gens = generating_set(T)
    rng = np.random.default_rng(seed)
    found = {}
    for _ in range(attempts):
        if len(found) >= count:
            break
        m = np.full(T.order, -1, dtype=np.int64)
        m[0] = 0
        m[gens] = rng.integers(1, T.order, len(gens)) if T.order > 1 else 0
        m = _propagate(T, T, m, True)
        if m is None or np.any(m < 0) or np.unique(m).size != T.order:
            continue
        try:
            Homomorphism(T, T, m)
        except NilfoldError:
            continue
        found.setdefault(m.tobytes(), m)
    T._cache[key] = list(found.values())
    return T._cache[key]


def universal_property_holds(cop: Coproduct, T: FiniteLoop, batch: int = 256) -> bool:
    """Every pair of homomorphisms X -> T, Y -> T extends through the
    injections to a homomorphism X + Y -> T.

    Uniqueness is automatic because the injected generators generate the
    model (checked while extending).  Existence is checked by building the
    candidate along a spanning tree and testing h(g s) = h(g) h(s) for all g
    and generators s.  If (f, g) extends to h then (a f, a g) extends to
    a h for any automorphism a of T, so one pair per orbit is enough.
    """
    G = cop.group
    X, Y = G.factors
    from .loopcore import generating_set

    gx, gy = generating_set(X), generating_set(Y)
    gens = [int(cop.injections[0][g]) for g in gx] + [int(cop.injections[1][g]) for g in gy]
    fx = np.array([h.map[gx] for h in enumerate_homs(X, T)], dtype=np.int64)
    fy = np.array([h.map[gy] for h in enumerate_homs(Y, T)], dtype=np.int64)
    images = np.concatenate([np.repeat(fx, len(fy), axis=0), np.tile(fy, (len(fx), 1))], axis=1)
    combos = images[_orbit_representatives(images, T, _automorphisms(T))]
    e = G.elements()
    right = [G.mul(e, s) for s in gens]
    flat = T.table.ravel()
    for start in range(0, combos.shape[0], batch):
        imgs = combos[start : start + batch]
        h = _extend(G, gens, imgs, T)
        for k in range(len(gens)):
            if np.any(h[:, right[k]] != flat[h * T.order + imgs[:, k][:, None]]):
                return False
    return True


# ---------------------------------------------------------------------------
# three factors


@dataclass
class CubeLimit:
    """Limit P of the punctured 3-cube: compatible triples in
    (X+Y) x (X+Z) x (Y+Z), counted fibrewise over X x Y x Z."""

    xy: Coproduct
    xz: Coproduct
    yz: Coproduct
    order: int

    def contains(self, u, v, w) -> bool:
        gxy, gxz, gyz = self.xy.group, self.xz.group, self.yz.group
        return (
            gxy.component(u, 0) == gxz.component(v, 0)
            and gxy.component(u, 1) == gyz.component(w, 0)
            and gxz.component(v, 1) == gyz.component(w, 1)
        )


def coproduct3(X: FiniteLoop, Y: FiniteLoop, Z: FiniteLoop, p: int) -> tuple[Class2Group, str]:
    """X + Y + Z in N(2, p) and how its laws were verified."""
    G = Class2Group([X, Y, Z], p)
    return G, G.verify()


def contraction(G: Class2Group, g, kill: int, target: Class2Group):
    """Image of g under the map X_1 + X_2 + X_3 -> the sum without factor
    ``kill`` (that factor sent to 1)."""
    d = G.decode(g)
    keep = [i for i in range(3) if i != kill]
    out = [d[..., i] for i in keep]
    a, b = keep
    out.append(d[..., G._t_slices[(a, b)]])
    digits = np.concatenate([o[..., None] if o.ndim == d.ndim - 1 else o for o in out], axis=-1)
    return target.encode(digits)


def cube_limit3(X: FiniteLoop, Y: FiniteLoop, Z: FiniteLoop, p: int) -> CubeLimit:
    xy, xz, yz = coproduct2(X, Y, p), coproduct2(X, Z, p), coproduct2(Y, Z, p)

    def fibre_counts(cop, A, B):
        e = cop.group.elements()
        c = np.zeros((A.order, B.order), dtype=np.int64)
        np.add.at(c, (cop.group.component(e, 0), cop.group.component(e, 1)), 1)
        return c

    cxy = fibre_counts(xy, X, Y)
    cxz = fibre_counts(xz, X, Z)
    cyz = fibre_counts(yz, Y, Z)
    order = int(np.einsum("ab,ac,bc->", cxy, cxz, cyz, dtype=object))
    return CubeLimit(xy, xz, yz, order)


def theta3(G: Class2Group, P: CubeLimit, g):
    """theta_3(g) as a triple of indices into X+Y, X+Z, Y+Z."""
    return (
        contraction(G, g, 2, P.xy.group),
        contraction(G, g, 1, P.xz.group),
        contraction(G, g, 0, P.yz.group),
    )


def theta3_is_homomorphism(G: Class2Group, P: CubeLimit, rng=None) -> str:
    """Check theta_3(ab) = theta_3(a) theta_3(b): exhaustive up to order 3^6,
    sampled beyond.  Raises AssertionError on failure."""
    if G.order <= EXHAUSTIVE_LIMIT:
        e = np.arange(G.order)
        a, b = np.repeat(e, G.order), np.tile(e, G.order)
        how = "exhaustive"
    else:
        rng = rng or np.random.default_rng(0)
        a, b = rng.integers(0, G.order, _SAMPLES), rng.integers(0, G.order, _SAMPLES)
        how = "sampled"
    ab = theta3(G, P, G.mul(a, b))
    ta, tb = theta3(G, P, a), theta3(G, P, b)
    for part, x, y, H in zip(ab, ta, tb, (P.xy.group, P.xz.group, P.yz.group)):
        if np.any(part != H.mul(x, y)):
            raise AssertionError("theta_3 is not a homomorphism")
    return how


def cr3(X: FiniteLoop, Y: FiniteLoop, Z: FiniteLoop, p: int, _built=None) -> Subgroup:
    """Kernel of theta_3: X + Y + Z -> P.

    The three contractions recover x, y and z, so the kernel lies in the
    t-part {x = y = z = 1}; that subgroup is scanned exhaustively.
    """
    G, P = _built or (coproduct3(X, Y, Z, p)[0], cube_limit3(X, Y, Z, p))
    width = len(G.radices)
    t_digits = np.array(list(itertools.product(*[range(int(r)) for r in G.radices[3:]])), dtype=np.int64)
    digits = np.zeros((t_digits.shape[0], width), dtype=np.int64)
    digits[:, 3:] = t_digits.reshape(t_digits.shape[0], width - 3)
    t_part = G.encode(digits)
    u, v, w = theta3(G, P, t_part)
    return Subgroup(G, t_part[(u == 0) & (v == 0) & (w == 0)])


@dataclass
class Cr3Report:
    sum_order: int
    limit_order: int
    cr3_order: int
    cr2_orders: tuple[int, int, int]
    verification: str

    @property
    def theta3_bijective(self):
        return self.cr3_order == 1 and self.sum_order == self.limit_order


def cr3_report(X: FiniteLoop, Y: FiniteLoop, Z: FiniteLoop, p: int) -> Cr3Report:
    G, how = coproduct3(X, Y, Z, p)
    P = cube_limit3(X, Y, Z, p)
    theta3_is_homomorphism(G, P)
    k = cr3(X, Y, Z, p, _built=(G, P))
    cr2 = tuple(cosmash2(A, B, p).order for A, B in ((X, Y), (X, Z), (Y, Z)))
    return Cr3Report(G.order, P.order, k.order, cr2, how)


def huq_equals_higgins_check(X: FiniteLoop, p: int | None = None, depth: int = 4) -> bool:
    """[X, [X, X]] from the commutator tower against the ternary Higgins
    commutator from the sandwich.  With ``p`` the input must lie in
    N(2, p); without it any group is accepted."""
    from .higgins import higgins_sandwich

    if p is not None:
        _require(X, p)
    elif not is_group(X):
        raise NotInVariety("huq_equals_higgins_check needs a group")
    huq = gamma(X, 3)
    s = higgins_sandwich(X, 2, depth)
    return s.exact and s.upper == huq
