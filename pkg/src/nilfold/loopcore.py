"""Finite loops given by Cayley tables, homomorphisms and built-in examples.

Elements are the integers ``0 .. order-1`` and index 0 is always the
identity.  Tables are stored as read-only numpy arrays so a loop can be
shared freely between threads.
"""
from __future__ import annotations

import hashlib
import itertools
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BadParameter, NoIdentity, NotAHomomorphism, NotLatinSquare, TooLarge, ValidationError

TRIPLE_SCAN_LIMIT = 64
HOM_SEARCH_LIMIT = 32


class Check(NamedTuple):
    """Outcome of an identity check; ``witness`` is set when it fails."""

    holds: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.holds


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class FiniteLoop:
    """A finite loop with identity 0.

    Use :func:`validate_loop` (or one of the ``make_*`` generators) rather
    than calling the constructor on unchecked data.
    """

    __slots__ = ("order", "table", "names", "_ldiv", "_rdiv", "_cache")

    def __init__(self, table, names=None, _checked=False):
        table = np.asarray(table, dtype=np.int64)
        if not _checked:
            _check_table(table)
        self.order = int(table.shape[0])
        self.table = _frozen(table)
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != self.order:
                raise ValidationError(f"expected {self.order} names, got {len(names)}")
        self.names = names
        n = self.order
        rows = np.arange(n)[:, None]
        ldiv = np.empty((n, n), dtype=np.int64)
        ldiv[rows, table] = np.arange(n)[None, :]
        rdiv = np.empty((n, n), dtype=np.int64)
        rdiv[table, np.arange(n)[None, :]] = rows
        self._ldiv = _frozen(ldiv)
        self._rdiv = _frozen(rdiv)
        self._cache = {}

    # element arithmetic; all accept numpy arrays as well as ints
    def mul(self, a, b):
        return self.table[a, b]

    def ldiv(self, a, b):
        """``a \\ b``: the unique x with a*x = b."""
        return self._ldiv[a, b]

    def rdiv(self, a, b):
        """``a / b``: the unique x with x*b = a."""
        return self._rdiv[a, b]

    @property
    def ldiv_table(self):
        return self._ldiv

    @property
    def rdiv_table(self):
        return self._rdiv

    def inverse(self, x):
        """Left-division inverse ``x \\ 1``; equals ``1 / x`` in Moufang loops."""
        return self._ldiv[x, 0]

    def power(self, x, k):
        y = 0
        for _ in range(k):
            y = int(self.table[y, x])
        return y

    def name(self, x):
        return self.names[x] if self.names else str(int(x))

    def fingerprint(self):
        """Hex sha256 of the table; used to identify inputs in reports."""
        return hashlib.sha256(self.table.astype("<i8").tobytes()).hexdigest()

    @property
    def is_trivial(self):
        return self.order == 1

    def __eq__(self, other):
        return isinstance(other, FiniteLoop) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self):
        return f"FiniteLoop(order={self.order})"


def _check_table(table):
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise ValidationError(f"table must be a non-empty square array, got shape {table.shape}")
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise ValidationError(f"table entries must lie in 0..{n - 1}")
    target = np.arange(n)
    srt = np.sort(table, axis=1)
    bad = np.flatnonzero((srt != target).any(axis=1))
    if bad.size:
        raise NotLatinSquare(f"row {bad[0]} repeats an entry", row=int(bad[0]))
    srt = np.sort(table, axis=0)
    bad = np.flatnonzero((srt != target[:, None]).any(axis=0))
    if bad.size:
        raise NotLatinSquare(f"column {bad[0]} repeats an entry", column=int(bad[0]))
    if not (np.array_equal(table[0], target) and np.array_equal(table[:, 0], target)):
        raise NoIdentity("index 0 is not a two-sided identity")


def validate_loop(table, names=None) -> FiniteLoop:
    """Check that ``table`` is a Latin square with identity 0 and wrap it.

    Raises NotLatinSquare (with the offending row or column) or NoIdentity.
    """
    try:
        arr = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"table is not a rectangular integer array: {exc}") from None
    return FiniteLoop(arr, names)


def _guard(L, limit, what):
    if L.order > limit:
        raise TooLarge(f"{what} is limited to order {limit}, got {L.order}")


def is_associative(L: FiniteLoop) -> Check:
    """Return whether (xy)z = x(yz) for all triples, with a failing triple."""
    _guard(L, TRIPLE_SCAN_LIMIT, "associativity scan")
    T = L.table
    # (xy)z vs x(yz) for every x, y, z at once: index [x, y, z]
    lhs = T[T[:, :, None], np.arange(L.order)[None, None, :]]
    rhs = T[np.arange(L.order)[:, None, None], T[None, :, :]]
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        return Check(False, tuple(int(v) for v in bad[0]))
    return Check(True)


def is_moufang(L: FiniteLoop) -> Check:
    """Check (z(xy))z = (zx)(yz) = z((xy)z) for all x, y, z.

    The witness is a failing triple ``(x, y, z)``.
    """
    _guard(L, TRIPLE_SCAN_LIMIT, "Moufang scan")
    T = L.table
    n = L.order
    x = np.arange(n)[:, None, None]
    y = np.arange(n)[None, :, None]
    z = np.arange(n)[None, None, :]
    xy = T[x, y]
    a = T[T[z, xy], z]
    b = T[T[z, x], T[y, z]]
    c = T[z, T[xy, z]]
    bad = np.argwhere((a != b) | (b != c))
    if bad.size:
        return Check(False, tuple(int(v) for v in bad[0]))
    return Check(True)


def is_commutative(L: FiniteLoop) -> Check:
    bad = np.argwhere(L.table != L.table.T)
    if bad.size:
        return Check(False, tuple(int(v) for v in bad[0]))
    return Check(True)


def is_group(L: FiniteLoop) -> bool:
    key = "is_group"
    if key not in L._cache:
        L._cache[key] = bool(is_associative(L))
    return L._cache[key]


def is_abelian_group(L: FiniteLoop) -> bool:
    return bool(is_commutative(L)) and is_group(L)


# ---------------------------------------------------------------------------
# homomorphisms


class Homomorphism:
    """Structure-preserving index map ``source -> target``.

    The homomorphism law is checked over the full table at construction.
    """

    __slots__ = ("source", "target", "map")

    def __init__(self, source: FiniteLoop, target: FiniteLoop, mapping, check=True):
        m = np.asarray(mapping, dtype=np.int64)
        if m.shape != (source.order,):
            raise NotAHomomorphism(f"map must have length {source.order}")
        if check:
            if m.size and (m.min() < 0 or m.max() >= target.order):
                raise NotAHomomorphism("map has entries outside the target")
            if m[0] != 0:
                raise NotAHomomorphism("identity is not sent to identity")
            bad = np.argwhere(m[source.table] != target.table[m[:, None], m[None, :]])
            if bad.size:
                x, y = (int(v) for v in bad[0])
                raise NotAHomomorphism(f"map(x*y) != map(x)*map(y) at x={x}, y={y}")
        self.source = source
        self.target = target
        self.map = _frozen(m)

    @property
    def is_surjective(self) -> bool:
        return np.unique(self.map).size == self.target.order

    @property
    def is_injective(self) -> bool:
        return np.unique(self.map).size == self.source.order

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective

    def kernel_mask(self):
        return self.map == 0

    def image_mask(self):
        mask = np.zeros(self.target.order, dtype=bool)
        mask[self.map] = True
        return mask

    def __call__(self, x):
        return self.map[x]

    def then(self, other: "Homomorphism") -> "Homomorphism":
        """Composite ``other o self``."""
        if other.source != self.target:
            raise NotAHomomorphism("composition across mismatched loops")
        return Homomorphism(self.source, other.target, other.map[self.map], check=False)

    def __eq__(self, other):
        return (
            isinstance(other, Homomorphism)
            and self.source == other.source
            and self.target == other.target
            and np.array_equal(self.map, other.map)
        )

    def __hash__(self):
        return hash(self.map.tobytes())

    def __repr__(self):
        return f"Homomorphism({self.source.order} -> {self.target.order})"


def identity_hom(L: FiniteLoop) -> Homomorphism:
    return Homomorphism(L, L, np.arange(L.order), check=False)


def closure_mask(L: FiniteLoop, mask):
    """Multiplicative closure of ``mask`` together with 0.

    In a finite loop a subset closed under multiplication is closed under
    both divisions too, so this is the generated subloop.
    """
    mask = np.array(mask, dtype=bool, copy=True)
    mask[0] = True
    while True:
        idx = np.flatnonzero(mask)
        new = np.zeros_like(mask)
        new[L.table[np.ix_(idx, idx)].ravel()] = True
        new |= mask
        if new.sum() == mask.sum():
            return mask
        mask = new


def generating_set(L: FiniteLoop) -> list[int]:
    """Greedy generating set: add the smallest element not yet generated."""
    key = "gens"
    if key in L._cache:
        return L._cache[key]
    gens = []
    mask = np.zeros(L.order, dtype=bool)
    mask[0] = True
    while not mask.all():
        x = int(np.flatnonzero(~mask)[0])
        gens.append(x)
        mask[x] = True
        mask = closure_mask(L, mask)
    L._cache[key] = gens
    return gens


def _propagate(X, Y, partial, injective):
    """Extend a partial map along products; None on contradiction."""
    m = partial.copy()
    while True:
        dom = np.flatnonzero(m >= 0)
        prod = X.table[np.ix_(dom, dom)].ravel()
        img = Y.table[np.ix_(m[dom], m[dom])].ravel()
        known = m[prod]
        if np.any((known >= 0) & (known != img)):
            return None
        # several pairs may hit the same new element with different images
        order = np.lexsort((img, prod))
        prod, img = prod[order], img[order]
        first = np.r_[True, prod[1:] != prod[:-1]]
        last = np.r_[prod[1:] != prod[:-1], True]
        if np.any(img[first] != img[last]):
            return None
        fresh = prod[first][m[prod[first]] < 0]
        if fresh.size == 0:
            break
        m[fresh] = img[first][m[prod[first]] < 0]
    if injective:
        vals = m[m >= 0]
        if np.unique(vals).size != vals.size:
            return None
    return m


def enumerate_homs(X: FiniteLoop, Y: FiniteLoop, injective=False) -> list[Homomorphism]:
    """All homomorphisms X -> Y by backtracking over a generating set of X."""
    _guard(X, HOM_SEARCH_LIMIT, "homomorphism enumeration")
    gens = generating_set(X)
    start = np.full(X.order, -1, dtype=np.int64)
    start[0] = 0
    out = []

    def extend(k, m):
        if k == len(gens):
            if np.all(m >= 0):
                try:
                    out.append(Homomorphism(X, Y, m))
                except NotAHomomorphism:
                    pass
            return
        g = gens[k]
        for y in range(Y.order):
            if m[g] >= 0 and m[g] != y:
                continue
            trial = m.copy()
            trial[g] = y
            nxt = _propagate(X, Y, trial, injective)
            if nxt is not None:
                extend(k + 1, nxt)
            if m[g] >= 0:
                break

    extend(0, start)
    return out


def find_isomorphism(A: FiniteLoop, B: FiniteLoop) -> Homomorphism | None:
    """Brute-force isomorphism search; None when A and B are not isomorphic."""
    if A.order != B.order:
        return None
    for h in enumerate_homs(A, B, injective=True):
        if h.is_isomorphism:
            return h
    return None


def are_isomorphic(A: FiniteLoop, B: FiniteLoop) -> bool:
    return find_isomorphism(A, B) is not None


# ---------------------------------------------------------------------------
# generators


def table_from_elements(elements: Sequence, op, names=None) -> FiniteLoop:
    """Cayley table of ``op`` on hashable ``elements`` (identity first)."""
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    table = [[index[op(a, b)] for b in elements] for a in elements]
    return validate_loop(np.array(table, dtype=np.int64).reshape(n, n), names)


def make_cyclic(n: int) -> FiniteLoop:
    if n < 1:
        raise BadParameter("cyclic order must be >= 1")
    r = np.arange(n)
    return FiniteLoop((r[:, None] + r[None, :]) % n, _checked=True)


def make_dihedral(n: int) -> FiniteLoop:
    """Symmetries of the regular n-gon, order 2n; index a + n*b is r^a s^b."""
    if n < 1:
        raise BadParameter("dihedral parameter must be >= 1")
    elements = [(a, b) for b in range(2) for a in range(n)]

    def op(x, y):
        a, b = x
        c, d = y
        return ((a + (c if b == 0 else -c)) % n, (b + d) % 2)

    return table_from_elements(elements, op)


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def _qconj(q):
    return (q[0], -q[1], -q[2], -q[3])


def _qadd(p, q):
    return tuple(x + y for x, y in zip(p, q))


def _qneg(q):
    return tuple(-x for x in q)


def _quaternion_units():
    units = []
    for k in range(4):
        for s in (1, -1):
            q = [0, 0, 0, 0]
            q[k] = s
            units.append(tuple(q))
    return units


_QNAMES = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]


def make_quaternion8() -> FiniteLoop:
    """Q8 with elements ordered 1, -1, i, -i, j, -j, k, -k."""
    return table_from_elements(_quaternion_units(), _qmul, _QNAMES)


def octonion_product(x, y):
    """Cayley-Dickson product (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))."""
    a, b = x
    c, d = y
    return (
        _qadd(_qmul(a, c), _qneg(_qmul(_qconj(d), b))),
        _qadd(_qmul(d, a), _qmul(b, _qconj(c))),
    )


def make_octonion_loop() -> FiniteLoop:
    """The 16 octonion units {+-1, +-e1, ..., +-e7} as a Moufang loop.

    Built by doubling the quaternion units: (q, 0) and (0, q) for q in Q8.
    Ordering: 1, -1, e1, -e1, ..., e7, -e7 where e1, e2, e3 = i, j, k and
    e4, e5, e6, e7 = (0,1), (0,i), (0,j), (0,k).
    """
    zero = (0, 0, 0, 0)
    units = _quaternion_units()
    elements = [(q, zero) for q in units] + [(zero, q) for q in units]
    names = ["1", "-1"] + [f"{s}e{k}" for k in range(1, 8) for s in ("", "-")]
    return table_from_elements(elements, octonion_product, names)


def make_elementary_abelian(p: int, k: int) -> FiniteLoop:
    """(Z/p)^k; element index is the base-p number with the first coordinate most significant."""
    if p < 2 or any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        raise BadParameter(f"{p} is not prime")
    if k < 0:
        raise BadParameter("rank must be >= 0")
    L = make_cyclic(1)
    for _ in range(k):
        L = direct_product(L, make_cyclic(p))
    return L


def direct_product(L1: FiniteLoop, L2: FiniteLoop) -> FiniteLoop:
    """Componentwise product; the pair (a, b) has index a * |L2| + b."""
    n2 = L2.order
    t = L1.table[:, None, :, None] * n2 + L2.table[None, :, None, :]
    n = L1.order * n2
    return FiniteLoop(t.reshape(n, n), _checked=True)


def make_heisenberg(p: int) -> FiniteLoop:
    """Upper unitriangular 3x3 matrices over Z/p, order p^3.

    (a, b, c)(a', b', c') = (a + a', b + b', c + c' + a b'); index a*p^2 + b*p + c.
    """
    if p < 2:
        raise BadParameter("p must be prime")
    elements = list(itertools.product(range(p), repeat=3))

    def op(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)

    return table_from_elements(elements, op)


# S3 with the pinned ordering id, (12), (13), (23), (123), (132); permutations
# act on {0,1,2} and (s t)(x) = s(t(x)).
S3_PERMUTATIONS = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]
S3_NAMES = ["id", "(12)", "(13)", "(23)", "(123)", "(132)"]
S3_SIGN = [1, -1, -1, -1, 1, 1]


def _compose(s, t):
    return tuple(s[t[x]] for x in range(3))


def make_s3() -> FiniteLoop:
    return table_from_elements(S3_PERMUTATIONS, _compose, S3_NAMES)


def make_cyclic_semidirect_s3(m: int) -> FiniteLoop:
    """Z/m x| S3 where transpositions act by negation and 3-cycles trivially.

    Element (a, s) has index 6a + s with s in the pinned S3 ordering.
    """
    if m < 1:
        raise BadParameter("m must be >= 1")
    S = make_s3().table
    n = 6 * m
    table = np.empty((n, n), dtype=np.int64)
    for a in range(m):
        for s in range(6):
            for b in range(m):
                c = (a + S3_SIGN[s] * b) % m
                table[6 * a + s, 6 * b + np.arange(6)] = 6 * c + S[s]
    return validate_loop(table)


BUILTINS = {
    "o16": make_octonion_loop,
    "q8": make_quaternion8,
    "d4": lambda: make_dihedral(4),
    "d8": lambda: make_dihedral(8),
    "s3": make_s3,
    "heisenberg27": lambda: make_heisenberg(3),
    "z9_semidirect_s3": lambda: make_cyclic_semidirect_s3(9),
    "z3_semidirect_s3": lambda: make_cyclic_semidirect_s3(3),
}


def builtin(name: str) -> FiniteLoop:
    """Look up a built-in loop; ``z/n`` gives the cyclic group of order n."""
    key = name.lower()
    if key.startswith("z/"):
        try:
            n = int(key[2:])
        except ValueError:
            raise BadParameter(f"bad cyclic group name {name!r}") from None
        return make_cyclic(n)
    if key not in BUILTINS:
        raise BadParameter(f"unknown builtin {name!r}; choose from z/n, {', '.join(sorted(BUILTINS))}")
    return BUILTINS[key]()


# ---------------------------------------------------------------------------
# text format


def format_table(L: FiniteLoop) -> str:
    lines = [str(L.order)]
    lines += [" ".join(str(int(v)) for v in row) for row in L.table]
    if L.names:
        lines.append(" ".join(L.names))
    return "\n".join(lines) + "\n"


def parse_table_lines(lines: list[str]) -> tuple[FiniteLoop, list[str]]:
    """Parse a loop table from the head of ``lines``; return the rest.

    Format: order n, then n rows of n integers, then an optional row of n
    names.  Blank lines are skipped.
    """
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValidationError("empty table file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ValidationError(f"first line must be the order, got {lines[0].strip()!r}") from None
    if n < 1:
        raise ValidationError("order must be positive")
    if len(lines) < n + 1:
        raise ValidationError(f"expected {n} table rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1 : n + 1]):
        parts = ln.split()
        if len(parts) != n:
            raise ValidationError(f"row {i} has {len(parts)} entries, expected {n}")
        try:
            rows.append([int(v) for v in parts])
        except ValueError:
            raise ValidationError(f"row {i} contains a non-integer") from None
    rest = lines[n + 1 :]
    names = None
    if rest:
        parts = rest[0].split()
        if len(parts) == n and not all(_is_int(p) for p in parts):
            names = parts
            rest = rest[1:]
    return validate_loop(rows, names), rest


def _is_int(s):
    try:
        int(s)
    except ValueError:
        return False
    return True


def parse_table(text: str) -> FiniteLoop:
    """Parse a complete table file, rejecting trailing garbage."""
    L, rest = parse_table_lines(text.splitlines())
    if rest:
        # a names line made only of integers is still a names line
        if len(rest) == 1 and len(rest[0].split()) == L.order and L.names is None:
            return FiniteLoop(L.table, rest[0].split(), _checked=True)
        raise ValidationError(f"trailing garbage after table: {rest[0].strip()!r}")
    return L
