"""Subloops, normal subloops, quotients and the characteristic subloops."""
from __future__ import annotations

import numpy as np

from .errors import NotNormal, TooLarge
from .loopcore import FiniteLoop, Homomorphism, closure_mask

LATTICE_LIMIT = 64


class SubSet:
    """A subset of a loop, stored as a boolean membership mask."""

    __slots__ = ("parent", "mask")

    def __init__(self, parent: FiniteLoop, mask):
        m = np.zeros(parent.order, dtype=bool)
        mask = np.asarray(mask)
        if mask.dtype == bool:
            m[:] = mask
        else:
            m[mask.astype(np.int64)] = True
        m.setflags(write=False)
        self.parent = parent
        self.mask = m

    @classmethod
    def of(cls, parent, elements=()):
        return cls(parent, np.asarray(list(elements), dtype=np.int64))

    @classmethod
    def full(cls, parent):
        return cls(parent, np.ones(parent.order, dtype=bool))

    @classmethod
    def trivial(cls, parent):
        return cls.of(parent, [0])

    @property
    def elements(self) -> list[int]:
        return [int(x) for x in np.flatnonzero(self.mask)]

    @property
    def order(self) -> int:
        return int(self.mask.sum())

    @property
    def is_trivial(self) -> bool:
        return self.order == 1 and bool(self.mask[0])

    @property
    def is_full(self) -> bool:
        return bool(self.mask.all())

    def issubset(self, other: "SubSet") -> bool:
        return not np.any(self.mask & ~other.mask)

    def __le__(self, other):
        return self.issubset(other)

    def __and__(self, other):
        return SubSet(self.parent, self.mask & other.mask)

    def __or__(self, other):
        return SubSet(self.parent, self.mask | other.mask)

    def __contains__(self, x):
        return bool(self.mask[x])

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return self.order

    def __eq__(self, other):
        return isinstance(other, SubSet) and other.parent.order == self.parent.order and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash(self.mask.tobytes())

    def key(self):
        """Sort key giving a canonical order on masks."""
        return (self.order, self.mask.tobytes()[::-1])

    def describe(self):
        return "{" + ", ".join(self.parent.name(x) for x in self.elements) + "}"

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class NormalSubloop(SubSet):
    """A normal subloop together with how its normality was established.

    ``certificate`` is ``"inner-mappings"`` (invariance checked directly) or
    ``("kernel", hom)`` when it arises as a kernel.  Construction always
    re-checks normality; pass ``check=False`` only for masks produced by
    :func:`normal_closure` itself.
    """

    __slots__ = ("certificate",)

    def __init__(self, parent, mask, certificate="inner-mappings", check=True):
        super().__init__(parent, mask)
        if check and not is_normal(parent, self):
            raise NotNormal(f"{self.describe()} is not a normal subloop")
        self.certificate = certificate

    @classmethod
    def of(cls, parent, elements=()):
        return cls(parent, np.asarray(list(elements), dtype=np.int64))

    @classmethod
    def full(cls, parent):
        return cls(parent, np.ones(parent.order, dtype=bool), check=False)

    @classmethod
    def trivial(cls, parent):
        return cls(parent, np.asarray([0]), check=False)


def as_mask(L, S):
    if isinstance(S, SubSet):
        return S.mask
    S = np.asarray(list(S) if not isinstance(S, np.ndarray) else S)
    if S.dtype == bool:
        return S
    m = np.zeros(L.order, dtype=bool)
    m[S.astype(np.int64)] = True
    return m


def generate_subloop(L: FiniteLoop, gens) -> SubSet:
    """Smallest subloop containing ``gens``."""
    return SubSet(L, closure_mask(L, as_mask(L, gens)))


def inner_mapping_generators(L: FiniteLoop) -> np.ndarray:
    """Rows are the permutations T(x), L(x,y), R(x,y) of the elements.

    T(x): z -> x \\ (z x);  L(x,y): z -> (xy) \\ (x (y z));
    R(x,y): z -> ((z x) y) / (x y).  Cached on the loop.
    """
    key = "inner"
    if key in L._cache:
        return L._cache[key]
    n = L.order
    T = L.table
    r = np.arange(n)
    x = r[:, None]
    z = r[None, :]
    maps = [L.ldiv(x, T[z, x])]
    xs, ys = np.divmod(np.arange(n * n), n)
    xy = T[xs, ys][:, None]
    X = xs[:, None]
    Y = ys[:, None]
    maps.append(L.ldiv(xy, T[X, T[Y, z]]))
    maps.append(L.rdiv(T[T[z, X], Y], xy))
    gens = np.unique(np.vstack(maps), axis=0)
    gens.setflags(write=False)
    L._cache[key] = gens
    return gens


def _is_subloop_mask(L, mask):
    idx = np.flatnonzero(mask)
    return bool(mask[0]) and bool(mask[L.table[np.ix_(idx, idx)]].all())


def _inner_invariant(L, mask):
    idx = np.flatnonzero(mask)
    return bool(mask[inner_mapping_generators(L)[:, idx]].all())


def _coset_labels(L, mask):
    """Label each element by its left coset xN; label 0 for N itself.

    Labels are assigned in order of the smallest representative.
    """
    idx = np.flatnonzero(mask)
    labels = np.full(L.order, -1, dtype=np.int64)
    reps = []
    for x in range(L.order):
        if labels[x] >= 0:
            continue
        coset = L.table[x, idx]
        if np.any(labels[coset] >= 0):
            return None, None
        labels[coset] = len(reps)
        reps.append(x)
    return labels, np.asarray(reps, dtype=np.int64)


def _congruence_table(L, mask):
    """Quotient table if the coset partition is a congruence, else None."""
    labels, reps = _coset_labels(L, mask)
    if labels is None:
        return None, None
    k = len(reps)
    q = labels[L.table[np.ix_(reps, reps)]]
    # well defined: label(x*y) depends only on labels of x and y
    if not np.array_equal(labels[L.table], q[labels[:, None], labels[None, :]]):
        return None, None
    # right cosets must agree with left cosets as well
    idx = np.flatnonzero(mask)
    for x in reps:
        if not np.array_equal(np.sort(labels[L.table[idx, x]]), np.full(idx.size, labels[x])):
            return None, None
    return q.reshape(k, k), labels


def is_normal(L: FiniteLoop, S) -> bool:
    """Normal subloop test: subloop, inner-mapping invariant, and the coset
    partition is a congruence.  The last two are redundant in theory and
    are both checked to catch convention slips."""
    mask = as_mask(L, S)
    if not _is_subloop_mask(L, mask):
        return False
    inner = _inner_invariant(L, mask)
    cong = _congruence_table(L, mask)[0] is not None
    if inner != cong:
        raise AssertionError("inner-mapping and congruence normality tests disagree")
    return inner


def _normal_closure_mask(L, mask):
    mask = np.array(mask, dtype=bool, copy=True)
    gens = inner_mapping_generators(L)
    while True:
        mask = closure_mask(L, mask)
        idx = np.flatnonzero(mask)
        img = np.zeros_like(mask)
        img[gens[:, idx].ravel()] = True
        img |= mask
        if img.sum() == mask.sum():
            return mask
        mask = img


def normal_closure(L: FiniteLoop, S) -> NormalSubloop:
    """Least normal subloop containing ``S``."""
    return NormalSubloop(L, _normal_closure_mask(L, as_mask(L, S)), check=False)


def join(L, A, B) -> NormalSubloop:
    return normal_closure(L, A.mask | B.mask)


def all_normal_subloops(L: FiniteLoop) -> list[NormalSubloop]:
    """Every normal subloop of L, smallest first.

    Seeds are the normal closures of single elements and pairs; the seed
    set is then closed under joins.  Since each normal subloop is the join
    of the closures of its elements, the result is complete.
    """
    if L.order > LATTICE_LIMIT:
        raise TooLarge(f"normal-subloop lattice is limited to order {LATTICE_LIMIT}")
    key = "normal_lattice"
    if key in L._cache:
        return L._cache[key]
    found = {}

    def add(mask):
        b = mask.tobytes()
        if b not in found:
            found[b] = mask
            return True
        return False

    add(_normal_closure_mask(L, np.eye(1, L.order, 0, dtype=bool)[0]))
    principal = {}
    for x in range(1, L.order):
        m = np.zeros(L.order, dtype=bool)
        m[x] = True
        principal[x] = _normal_closure_mask(L, m)
        add(principal[x])
    xs = sorted(principal)
    for i, x in enumerate(xs):
        for y in xs[i + 1 :]:
            if principal[x][y] or principal[y][x]:
                continue
            add(_normal_closure_mask(L, principal[x] | principal[y]))
    frontier = list(found.values())
    while frontier:
        base = list(found.values())
        new = []
        for a in frontier:
            for b in base:
                if np.all(a <= b) or np.all(b <= a):
                    continue
                m = _normal_closure_mask(L, a | b)
                if add(m):
                    new.append(m)
        frontier = new
    out = [NormalSubloop(L, m, check=False) for m in found.values()]
    out.sort(key=SubSet.key)
    L._cache[key] = out
    return out


def congruence_normal_subloops(L: FiniteLoop) -> list[SubSet]:
    """Brute-force oracle: all subsets containing 0 whose size divides the
    order and whose coset partition is a congruence.  Exponential; for
    order <= 16 only."""
    if L.order > 16:
        raise TooLarge("brute-force congruence enumeration is limited to order 16")
    n = L.order
    out = []
    rest = n - 1
    for bits in range(1 << rest):
        size = 1 + bin(bits).count("1")
        if n % size:
            continue
        mask = np.zeros(n, dtype=bool)
        mask[0] = True
        mask[1:] = [(bits >> i) & 1 for i in range(rest)]
        if not _is_subloop_mask(L, mask):
            continue
        if _congruence_table(L, mask)[0] is not None:
            out.append(SubSet(L, mask))
    out.sort(key=SubSet.key)
    return out


def quotient(L: FiniteLoop, N) -> tuple[FiniteLoop, Homomorphism]:
    """Quotient loop L/N on cosets and the projection homomorphism.

    The coset of the identity gets index 0; the other cosets are numbered
    by their smallest element.
    """
    mask = as_mask(L, N)
    if not _is_subloop_mask(L, mask):
        raise NotNormal("not a subloop")
    q, labels = _congruence_table(L, mask)
    if q is None:
        raise NotNormal("coset product is not well defined")
    Q = FiniteLoop(q, _checked=False)
    return Q, Homomorphism(L, Q, labels)


def kernel(f: Homomorphism) -> NormalSubloop:
    return NormalSubloop(f.source, f.kernel_mask(), certificate=("kernel", f), check=False)


def nucleus(L: FiniteLoop) -> SubSet:
    """Elements z that associate in every position: (zx)y = z(xy),
    (xz)y = x(zy), (xy)z = x(yz) for all x, y."""
    T = L.table
    r = np.arange(L.order)
    z = r[:, None, None]
    x = r[None, :, None]
    y = r[None, None, :]
    left = T[T[z, x], y] == T[z, T[x, y]]
    mid = T[T[x, z], y] == T[x, T[z, y]]
    right = T[T[x, y], z] == T[x, T[y, z]]
    return SubSet(L, (left & mid & right).all(axis=(1, 2)))


def moufang_centre(L: FiniteLoop) -> SubSet:
    """Elements commuting with everything."""
    return SubSet(L, (L.table == L.table.T).all(axis=1))


def centre(L: FiniteLoop) -> NormalSubloop:
    """Moufang centre intersected with the nucleus, checked to be normal."""
    return NormalSubloop(L, (moufang_centre(L) & nucleus(L)).mask)
