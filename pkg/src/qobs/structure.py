"""Finite quantum structures as validated partial-addition tables.

Elements are small integers ``0 .. n-1``.  The partial sum lives in an
``(n, n)`` integer table where ``UNDEF`` marks an undefined sum.  Order,
differences, complements, meets and joins are all derived from that table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AxiomViolation,
    ClosureOverflow,
    DuplicateEntry,
    MissingComplement,
    NoRefinement,
    NotSummable,
    NotSurjective,
    PreconditionFailed,
    SizeOverflow,
    TooLarge,
)

UNDEF = -1
MAX_ELEMENTS = 4096
# flavor checks are cubic in the element count
FLAVOR_LIMIT = 512
RDP_SEARCH_LIMIT = 12
POWER_SET_LIMIT = 12

FLAGS = ("mv", "lattice", "boolean", "orthomodular_poset", "rdp")


def _readonly(a):
    a.setflags(write=False)
    return a


def _bound_table(le):
    """Greatest lower bounds for every pair under ``le`` (UNDEF when none)."""
    n = le.shape[0]
    height = le.sum(axis=0)
    out = np.full((n, n), UNDEF, dtype=np.int32)
    for a in range(n):
        lower = le[:, a][:, None] & le
        cand = np.where(lower, height[:, None], -1).argmax(axis=0)
        ok = (le[:, cand] | ~lower).all(axis=0)
        out[a] = np.where(ok, cand, UNDEF)
    return out


class QuantumStructure:
    """An effect algebra on a finite carrier.

    Construction runs the four effect-algebra axioms exhaustively (unless
    ``validate=False`` is passed by a combinator that guarantees them) and
    then computes the derived order and the flavor flags.
    """

    carrier = None
    labels = None

    def __init__(
        self,
        names: Sequence[str],
        plus,
        zero: int,
        one: int,
        *,
        values: Sequence[Any] | None = None,
        flavor_hint: Iterable[str] | None = None,
        factors: tuple | None = None,
        validate: bool = True,
    ):
        names = tuple(str(x) for x in names)
        if not names:
            raise PreconditionFailed("structure has no elements")
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise DuplicateEntry(f"element name {dup!r} declared twice")
        n = len(names)
        if n > MAX_ELEMENTS:
            raise SizeOverflow(f"{n} elements exceeds {MAX_ELEMENTS}")
        plus = np.array(plus, dtype=np.int32)
        if plus.shape != (n, n):
            raise PreconditionFailed(f"addition table has shape {plus.shape}, expected {(n, n)}")
        self.n = n
        self.names = names
        self.zero = int(zero)
        self.one = int(one)
        self.values = tuple(values) if values is not None else None
        self.factors = factors
        self._index = {name: i for i, name in enumerate(names)}
        self.plus = _readonly(plus)
        if validate:
            _check_axioms(self)
        self.complement = _readonly(_complements(self))
        self.leq, self.minus = _order(self)
        if validate:
            _check_order(self)
        self.flavor, self.undetermined = _flavors(self, flavor_hint)

    # -- lookup ---------------------------------------------------------
    def __len__(self):
        return self.n

    def __repr__(self):
        flags = ",".join(sorted(self.flavor)) or "-"
        return f"<{type(self).__name__} n={self.n} flavor={flags}>"

    def element(self, name) -> int:
        try:
            return self._index[str(name)]
        except KeyError:
            raise KeyError(f"no element named {name!r}") from None

    def name(self, a: int) -> str:
        return self.names[a]

    def index_of_value(self, value) -> int:
        if self.values is None:
            raise PreconditionFailed("structure carries no element values")
        try:
            return self._value_index[value]
        except KeyError:
            raise KeyError(f"no element with value {value!r}") from None

    @cached_property
    def _value_index(self):
        return {v: i for i, v in enumerate(self.values)}

    # -- arithmetic -----------------------------------------------------
    def add(self, a: int, b: int) -> int | None:
        c = int(self.plus[a, b])
        return None if c == UNDEF else c

    def sub(self, b: int, a: int) -> int | None:
        """``b - a`` when ``a <= b``."""
        c = int(self.minus[b, a])
        return None if c == UNDEF else c

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a, b])

    def comp(self, a: int) -> int:
        return int(self.complement[a])

    @cached_property
    def meet_table(self):
        return _readonly(_bound_table(self.leq))

    @cached_property
    def join_table(self):
        return _readonly(_bound_table(self.leq.T))

    def meet(self, a: int, b: int) -> int | None:
        c = int(self.meet_table[a, b])
        return None if c == UNDEF else c

    def join(self, a: int, b: int) -> int | None:
        c = int(self.join_table[a, b])
        return None if c == UNDEF else c

    @cached_property
    def oplus_table(self):
        """Total MV sum ``a + (a' meet b)``; only meaningful on MV structures."""
        if "mv" not in self.flavor:
            raise PreconditionFailed("structure is not an MV-algebra")
        return _derived_oplus(self)

    def has(self, flag: str) -> bool:
        return flag in self.flavor

    @property
    def is_power_set(self) -> bool:
        return self.values is not None and all(isinstance(v, frozenset) for v in self.values)

class MvStructure(QuantumStructure):
    """An MV-algebra together with its induced effect algebra.

    The partial sum is defined exactly when ``a <= b*`` and then equals
    ``a (+) b``.
    """

    def __init__(self, names, oplus, star, zero, one, *, values=None, factors=None, validate=True):
        oplus = np.array(oplus, dtype=np.int32)
        star = np.array(star, dtype=np.int32)
        n = len(names)
        # a <= b* iff a* (+) b* = 1
        admissible = oplus[star[:, None], star[None, :]] == one
        plus = np.where(admissible, oplus, UNDEF)
        self.oplus = _readonly(oplus)
        self.star = _readonly(star)
        if validate and n <= FLAVOR_LIMIT:
            _check_mv_axioms(oplus, star, zero, one)
        hint = {"mv", "lattice", "rdp"}
        if all(bool(oplus[a, a] == a) for a in range(n)):
            hint.add("boolean")
            hint.add("orthomodular_poset")
        super().__init__(
            names, plus, zero, one, values=values, flavor_hint=hint, factors=factors, validate=validate
        )
        self.__dict__["oplus_table"] = self.oplus


# ---------------------------------------------------------------------------
# validation


def _check_axioms(s: QuantumStructure):
    p = s.plus
    n = s.n
    if not 0 <= s.zero < n or not 0 <= s.one < n:
        raise PreconditionFailed("zero or one is not an element")
    if ((p < UNDEF) | (p >= n)).any():
        raise PreconditionFailed("addition table refers to unknown elements")
    bad = np.argwhere(p != p.T)
    if len(bad):
        a, b = map(int, bad[0])
        raise AxiomViolation("i", (s.names[a], s.names[b]))
    idx = np.arange(n)
    for a in range(n):
        ab = p[a]
        lhs = np.where((ab >= 0)[:, None], p[np.clip(ab, 0, None)], UNDEF)
        rhs = np.where(p >= 0, p[a][np.clip(p, 0, None)], UNDEF)
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            b, c = map(int, bad[0])
            raise AxiomViolation("ii", (s.names[a], s.names[b], s.names[c]))
    bad = np.flatnonzero((p[:, s.one] >= 0) & (idx != s.zero))
    if len(bad):
        raise AxiomViolation("iv", (s.names[int(bad[0])], s.names[s.one]))
    hits = p == s.one
    counts = hits.sum(axis=1)
    if (counts == 0).any():
        raise MissingComplement(s.names[int(np.argmax(counts == 0))])
    if (counts > 1).any():
        a = int(np.argmax(counts > 1))
        cs = idx[hits[a]][:2]
        raise AxiomViolation("iii", (s.names[a], s.names[cs[0]], s.names[cs[1]]))


def _complements(s):
    hits = s.plus == s.one
    if not hits.any(axis=1).all():
        raise MissingComplement(s.names[int(np.argmin(hits.any(axis=1)))])
    return hits.argmax(axis=1).astype(np.int32)


def _order(s):
    n = s.n
    leq = np.zeros((n, n), dtype=bool)
    minus = np.full((n, n), UNDEF, dtype=np.int32)
    for a in range(n):
        cs = np.flatnonzero(s.plus[a] >= 0)
        bs = s.plus[a, cs]
        leq[a, bs] = True
        minus[bs, a] = cs
    return _readonly(leq), _readonly(minus)


def _check_order(s):
    n = s.n
    both = s.leq & s.leq.T
    np.fill_diagonal(both, False)
    bad = np.argwhere(both)
    if len(bad):
        a, b = map(int, bad[0])
        raise AxiomViolation("order", (s.names[a], s.names[b]))
    if not s.leq[s.zero].all() or not s.leq[:, s.one].all():
        raise AxiomViolation("order", (s.names[s.zero], s.names[s.one]))
    if not np.diag(s.leq).all():
        a = int(np.argmin(np.diag(s.leq)))
        raise AxiomViolation("order", (s.names[a],))


def _check_mv_axioms(oplus, star, zero, one):
    n = len(star)
    idx = np.arange(n)

    def fail(axiom, *w):
        raise AxiomViolation(f"mv-{axiom}", tuple(int(x) for x in w))

    bad = np.argwhere(oplus != oplus.T)
    if len(bad):
        fail("i", *bad[0])
    for a in range(n):
        lhs = oplus[oplus[a]]  # (a+b)+c over (b, c)
        rhs = oplus[a][oplus]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            fail("ii", a, *bad[0])
    if (oplus[:, zero] != idx).any():
        fail("iii", np.argmax(oplus[:, zero] != idx))
    if (oplus[:, one] != one).any():
        fail("iv", np.argmax(oplus[:, one] != one))
    if (star[star] != idx).any():
        fail("v", np.argmax(star[star] != idx))
    if (oplus[idx, star] != one).any():
        fail("vi", np.argmax(oplus[idx, star] != one))
    if star[zero] != one:
        fail("vii", zero)
    a = idx[:, None]
    b = idx[None, :]
    lhs = oplus[star[oplus[star[a], b]], b]
    rhs = oplus[star[oplus[a, star[b]]], a]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        fail("viii", *bad[0])


def _derived_oplus(s):
    m = s.meet_table[s.complement]  # m[a, b] = a' meet b
    out = s.plus[np.arange(s.n)[:, None], np.clip(m, 0, None)]
    return _readonly(np.where(m >= 0, out, UNDEF).astype(np.int32))


def _is_mv(s) -> bool:
    if not _is_lattice(s):
        return False
    ox = _derived_oplus(s)
    if (ox < 0).any():
        return False
    try:
        _check_mv_axioms(ox, s.complement, s.zero, s.one)
    except AxiomViolation:
        return False
    star = s.complement
    admissible = ox[star[:, None], star[None, :]] == s.one
    return bool((np.where(admissible, ox, UNDEF) == s.plus).all()) and _is_distributive(s)


def _is_lattice(s) -> bool:
    return bool((s.meet_table >= 0).all() and (s.join_table >= 0).all())


def _is_distributive(s) -> bool:
    m, j = s.meet_table, s.join_table
    for a in range(s.n):
        if (m[a][j] != j[m[a][:, None], m[a][None, :]]).any():
            return False
    return True


def _is_orthomodular_poset(s) -> bool:
    idx = np.arange(s.n)
    diag = s.plus[idx, idx]
    if ((diag >= 0) & (idx != s.zero)).any():
        return False
    defined = s.plus >= 0
    return bool((s.join_table[defined] == s.plus[defined]).all())


def _flavors(s, hint):
    flags = set()
    undetermined = set()
    if s.n <= FLAVOR_LIMIT:
        lattice = _is_lattice(s)
        if lattice:
            flags.add("lattice")
        if _is_mv(s):
            flags.add("mv")
            flags.add("rdp")
            if (s.meet_table[np.arange(s.n), s.complement] == s.zero).all():
                flags.add("boolean")
        if _is_orthomodular_poset(s):
            flags.add("orthomodular_poset")
        if "rdp" not in flags:
            if s.n <= RDP_SEARCH_LIMIT:
                if _has_rdp(s):
                    flags.add("rdp")
            elif hint is not None and "rdp" in hint:
                flags.add("rdp")
            else:
                undetermined.add("rdp")
        if hint is not None:
            missing = set(hint) - flags - undetermined
            if missing:
                raise AxiomViolation("flavor", tuple(sorted(missing)))
    elif hint is not None:
        flags = set(hint)
        undetermined = set(FLAGS) - flags
    else:
        undetermined = set(FLAGS)
    return frozenset(flags), frozenset(undetermined)


# ---------------------------------------------------------------------------
# constructors


def _fraction_name(q: Fraction) -> str:
    return str(q)


def make_chain(n: int) -> MvStructure:
    """The MV-chain ``{0, 1/n, ..., 1}`` with truncated addition."""
    if n < 1:
        raise PreconditionFailed("chain length must be at least 1")
    vals = [Fraction(k, n) for k in range(n + 1)]
    k = np.arange(n + 1)
    oplus = np.minimum(k[:, None] + k[None, :], n)
    star = n - k
    return MvStructure([_fraction_name(v) for v in vals], oplus, star, 0, n, values=vals)


def _set_name(labels) -> str:
    return "{" + ",".join(labels) + "}"


def make_power_set(labels: Iterable[str]) -> MvStructure:
    """Boolean algebra of all subsets of ``labels``; ``+`` is disjoint union."""
    labels = list(dict.fromkeys(str(x) for x in labels))
    k = len(labels)
    if k < 1:
        raise PreconditionFailed("power set needs at least one label")
    if k > POWER_SET_LIMIT:
        raise TooLarge(f"{k} labels gives {2 ** k} elements (limit {POWER_SET_LIMIT} labels)")
    n = 1 << k
    masks = np.arange(n)
    oplus = masks[:, None] | masks[None, :]
    star = (n - 1) ^ masks
    values = [frozenset(labels[i] for i in range(k) if m >> i & 1) for m in range(n)]
    names = []
    for m, v in enumerate(values):
        if m == 0:
            names.append("0")
        elif m == n - 1:
            names.append("1")
        else:
            names.append(_set_name([x for x in labels if x in v]))
    s = MvStructure(names, oplus, star, 0, n - 1, values=values)
    s.labels = tuple(labels)
    return s


def make_mo(k: int = 2) -> QuantumStructure:
    """Horizontal sum of ``k`` four-element Boolean algebras (MO_k).

    Elements are ``0, a, a', b, b', ..., 1``; for ``k >= 2`` this is an
    orthomodular lattice that is not distributive.
    """
    if not 1 <= k <= 26:
        raise PreconditionFailed("k must be between 1 and 26")
    letters = [chr(ord("a") + i) for i in range(k)]
    names = ["0"]
    for x in letters:
        names += [x, x + "'"]
    names.append("1")
    n = len(names)
    plus = np.full((n, n), UNDEF, dtype=np.int32)
    plus[0, :] = np.arange(n)
    plus[:, 0] = np.arange(n)
    for i in range(k):
        a, b = 1 + 2 * i, 2 + 2 * i
        plus[a, b] = plus[b, a] = n - 1
    return QuantumStructure(names, plus, 0, n - 1)


def _pair_name(s1, s2, i, j):
    return f"({s1.names[i]},{s2.names[j]})"


def product(s1: QuantumStructure, s2: QuantumStructure) -> QuantumStructure:
    """Coordinatewise product; a sum is defined iff both coordinates are."""
    n1, n2 = s1.n, s2.n
    n = n1 * n2
    if n > MAX_ELEMENTS:
        raise SizeOverflow(f"product has {n} elements (limit {MAX_ELEMENTS})")
    zero = s1.zero * n2 + s2.zero
    one = s1.one * n2 + s2.one
    names = []
    values = []
    for i in range(n1):
        for j in range(n2):
            k = i * n2 + j
            names.append("0" if k == zero else "1" if k == one else _pair_name(s1, s2, i, j))
            v1 = s1.values[i] if s1.values is not None else s1.names[i]
            v2 = s2.values[j] if s2.values is not None else s2.names[j]
            values.append((v1, v2))
    hint = set(s1.flavor & s2.flavor) - {"rdp"}
    if "rdp" in s1.flavor and "rdp" in s2.flavor:
        hint.add("rdp")
    validate = n <= FLAVOR_LIMIT
    if "mv" in hint:
        o1, o2 = s1.oplus_table, s2.oplus_table
        oplus = (o1[:, None, :, None] * n2 + o2[None, :, None, :]).reshape(n, n)
        star = (s1.complement[:, None] * n2 + s2.complement[None, :]).reshape(n)
        s = MvStructure(names, oplus, star, zero, one, values=values, factors=(s1, s2), validate=validate)
    else:
        p1, p2 = s1.plus, s2.plus
        both = (p1[:, None, :, None] >= 0) & (p2[None, :, None, :] >= 0)
        plus = np.where(both, p1[:, None, :, None] * n2 + p2[None, :, None, :], UNDEF).reshape(n, n)
        s = QuantumStructure(
            names, plus, zero, one, values=values, flavor_hint=hint, factors=(s1, s2), validate=validate
        )
    return s


@dataclass(frozen=True)
class FuzzyCarrier:
    """Point labels and the [0,1]-valued vectors of a finite effect-tribe."""

    omega: tuple
    functions: tuple

    def value(self, a: int, point) -> Fraction:
        return self.functions[a][self.omega.index(point)]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _vector_name(v, zero, one):
    if v == zero:
        return "0"
    if v == one:
        return "1"
    if len(v) == 1:
        return str(v[0])
    return "[" + ",".join(str(t) for t in v) + "]"


def make_fuzzy(omega: Sequence, functions: Iterable[Sequence], max_size: int = 512):
    """Close a family of fuzzy sets into an effect-tribe.

    The closure adds ``1 - f`` and every admissible pointwise sum
    ``f + g`` (``f <= 1 - g``) until nothing new appears.  Returns the
    carrier and its validated structure.
    """
    omega = tuple(str(w) for w in omega)
    if not omega:
        raise PreconditionFailed("omega must be non-empty")
    k = len(omega)
    zero = tuple(Fraction(0) for _ in range(k))
    one = tuple(Fraction(1) for _ in range(k))
    seeds = set()
    for f in functions:
        v = tuple(_as_fraction(t) for t in f)
        if len(v) != k:
            raise PreconditionFailed(f"vector {f!r} has length {len(v)}, expected {k}")
        if any(t < 0 or t > 1 for t in v):
            raise PreconditionFailed(f"vector {f!r} leaves [0,1]")
        seeds.add(v)
    members = {zero, one}
    frontier = list(seeds | members)
    members |= seeds
    while frontier:
        new = []
        for f in frontier:
            g = tuple(1 - t for t in f)
            if g not in members:
                members.add(g)
                new.append(g)
        for f in frontier + new:
            for g in list(members):
                if all(x + y <= 1 for x, y in zip(f, g)):
                    h = tuple(x + y for x, y in zip(f, g))
                    if h not in members:
                        members.add(h)
                        new.append(h)
            if len(members) > max_size:
                raise ClosureOverflow(f"closure exceeds {max_size} elements")
        frontier = new
    vecs = sorted(members)
    index = {v: i for i, v in enumerate(vecs)}
    n = len(vecs)
    plus = np.full((n, n), UNDEF, dtype=np.int32)
    for i, f in enumerate(vecs):
        for j in range(i, n):
            g = vecs[j]
            if all(x + y <= 1 for x, y in zip(f, g)):
                plus[i, j] = plus[j, i] = index[tuple(x + y for x, y in zip(f, g))]
    names = [_vector_name(v, zero, one) for v in vecs]
    carrier = FuzzyCarrier(omega, tuple(vecs))
    s = QuantumStructure(names, plus, index[zero], index[one], values=vecs)
    s.carrier = carrier
    return carrier, s


# ---------------------------------------------------------------------------
# compatibility, blocks, sharp elements


def compatibility_witness(s: QuantumStructure, a: int, b: int):
    """A triple ``(a1, b1, c)`` with ``a = a1+c``, ``b = b1+c`` and
    ``a1+b1+c`` defined, or ``None`` when ``a`` and ``b`` are incompatible."""
    if s.le(a, b):
        return (s.zero, s.sub(b, a), a)
    if s.le(b, a):
        return (s.sub(a, b), s.zero, b)
    for c in range(s.n):
        if not (s.leq[c, a] and s.leq[c, b]):
            continue
        a1, b1 = s.sub(a, c), s.sub(b, c)
        d = s.add(a1, b1)
        if d is not None and s.add(d, c) is not None:
            return (a1, b1, c)
    return None


def is_compatible(s: QuantumStructure, a: int, b: int) -> bool:
    return compatibility_witness(s, a, b) is not None


def compatibility_matrix(s: QuantumStructure):
    n = s.n
    p, minus, leq = s.plus, s.minus, s.leq
    out = np.zeros((n, n), dtype=bool)
    for a in range(n):
        cand = leq[:, a][None, :] & leq.T
        a1 = minus[a][None, :]
        b1 = minus
        d = np.where((a1 >= 0) & (b1 >= 0), p[np.clip(a1, 0, None), np.clip(b1, 0, None)], UNDEF)
        top = np.where(d >= 0, p[np.clip(d, 0, None), np.arange(n)[None, :]], UNDEF)
        out[a] = (cand & (top >= 0)).any(axis=1)
    return out


def _maximal_cliques(adj: list[int]) -> list[int]:
    """Bron-Kerbosch with pivoting over bitmask adjacency."""
    found = []

    def expand(r, p, x):
        if not p and not x:
            found.append(r)
            return
        px = p | x
        pivot = max(_bits(px), key=lambda u: (p & adj[u]).bit_count())
        for v in _bits(p & ~adj[pivot]):
            bit = 1 << v
            expand(r | bit, p & adj[v], x & adj[v])
            p &= ~bit
            x |= bit

    expand(0, (1 << len(adj)) - 1, 0)
    return found


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def blocks(s: QuantumStructure, verify: bool = True) -> list[frozenset]:
    """All maximal sets of pairwise compatible elements, in lexicographic
    order of their sorted member indices."""
    compat = compatibility_matrix(s)
    adj = [sum(1 << int(j) for j in np.flatnonzero(compat[i]) if j != i) for i in range(s.n)]
    cliques = sorted(sorted(_bits(m)) for m in _maximal_cliques(adj))
    out = [frozenset(c) for c in cliques]
    if verify and "lattice" in s.flavor:
        for blk in out:
            for a in blk:
                if s.comp(a) not in blk:
                    raise AxiomViolation("block-closure", (s.names[a],))
                for b in blk:
                    if s.meet(a, b) not in blk or s.join(a, b) not in blk:
                        raise AxiomViolation("block-closure", (s.names[a], s.names[b]))
    return out


def sharp_elements(s: QuantumStructure) -> frozenset:
    """Elements ``a`` whose meet with ``a'`` exists and is ``0``.

    Elements where the meet does not exist are excluded; see
    :func:`meet_failures` for the list.
    """
    idx = np.arange(s.n)
    m = s.meet_table[idx, s.complement]
    out = frozenset(int(a) for a in idx[m == s.zero])
    if "rdp" in s.flavor:
        _check_boolean_subalgebra(s, out)
    return out


def meet_failures(s: QuantumStructure) -> tuple:
    """Elements for which ``a meet a'`` does not exist."""
    idx = np.arange(s.n)
    return tuple(int(a) for a in idx[s.meet_table[idx, s.complement] == UNDEF])


def _check_boolean_subalgebra(s, sub):
    for a in sub:
        if s.comp(a) not in sub:
            raise AxiomViolation("sharp-boolean", (s.names[a],))
        for b in sub:
            c = s.add(a, b)
            if c is not None and c not in sub:
                raise AxiomViolation("sharp-boolean", (s.names[a], s.names[b]))
            if not is_compatible(s, a, b):
                raise AxiomViolation("sharp-boolean", (s.names[a], s.names[b]))


def is_subalgebra(s: QuantumStructure, subset: Iterable[int]) -> bool:
    """Closed under complement and under every defined sum, with 0 and 1."""
    sub = set(subset)
    if s.zero not in sub or s.one not in sub:
        return False
    for a in sub:
        if s.comp(a) not in sub:
            return False
        for b in sub:
            c = s.add(a, b)
            if c is not None and c not in sub:
                return False
    return True


# ---------------------------------------------------------------------------
# Riesz decomposition


@dataclass(frozen=True)
class RefinementMatrix:
    c11: int
    c12: int
    c21: int
    c22: int

    def as_tuple(self):
        return (self.c11, self.c12, self.c21, self.c22)


def _find_refinement(s, a1, a2, b1, b2):
    for c11 in range(s.n):
        if not (s.leq[c11, a1] and s.leq[c11, b1]):
            continue
        c12 = s.sub(a1, c11)
        c21 = s.sub(b1, c11)
        c22 = s.sub(a2, c21)
        if c22 is None:
            continue
        if s.add(c12, c22) == b2:
            return RefinementMatrix(c11, c12, c21, c22)
    return None


def _has_rdp(s) -> bool:
    by_sum: dict[int, list] = {}
    for a, b in np.argwhere(s.plus >= 0):
        by_sum.setdefault(int(s.plus[a, b]), []).append((int(a), int(b)))
    for pairs in by_sum.values():
        for (a1, a2), (b1, b2) in itertools.product(pairs, repeat=2):
            if _find_refinement(s, a1, a2, b1, b2) is None:
                return False
    return True


def rdp_refine(s: QuantumStructure, a1: int, a2: int, b1: int, b2: int) -> RefinementMatrix:
    """Common refinement of ``a1 + a2 = b1 + b2``.

    Exhaustive search; among all refinements the one with the smallest
    ``c11`` index is returned (``c12`` and ``c21`` follow from ``c11`` by
    cancellation).
    """
    top = s.add(a1, a2)
    if top is None or top != s.add(b1, b2):
        raise PreconditionFailed("a1+a2 and b1+b2 must be defined and equal")
    m = _find_refinement(s, a1, a2, b1, b2)
    if m is None:
        raise NoRefinement(f"no refinement of {s.names[a1]}+{s.names[a2]} = {s.names[b1]}+{s.names[b2]}")
    return m


# ---------------------------------------------------------------------------
# homomorphisms and lifting


@dataclass(frozen=True)
class Homomorphism:
    source: QuantumStructure
    target: QuantumStructure
    mapping: tuple

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int32)
        if m.shape != (self.source.n,):
            raise PreconditionFailed("mapping must be total on the source")
        if m[self.source.one] != self.target.one:
            raise PreconditionFailed("homomorphism must send 1 to 1")
        p = self.source.plus
        a, b = np.nonzero(p >= 0)
        img = self.target.plus[m[a], m[b]]
        bad = np.flatnonzero(img != m[p[a, b]])
        if len(bad):
            i = bad[0]
            raise PreconditionFailed(
                f"not additive at ({self.source.names[a[i]]}, {self.source.names[b[i]]})"
            )
        object.__setattr__(self, "mapping", tuple(int(x) for x in m))

    def __call__(self, a: int) -> int:
        return self.mapping[a]

    @property
    def surjective(self) -> bool:
        return len(set(self.mapping)) == self.target.n

    @property
    def preserves_oplus(self) -> bool:
        if "mv" not in self.source.flavor or "mv" not in self.target.flavor:
            return False
        m = np.asarray(self.mapping)
        return bool((m[self.source.oplus_table] == self.target.oplus_table[m[:, None], m[None, :]]).all())

    @classmethod
    def from_values(cls, source, target, fn: Callable):
        """Build from a function on element values (or names when absent)."""
        vals = source.values if source.values is not None else source.names
        if target.values is not None:
            mapping = [target.index_of_value(fn(v)) for v in vals]
        else:
            mapping = [target.element(fn(v)) for v in vals]
        return cls(source, target, tuple(mapping))


def identity(s: QuantumStructure) -> Homomorphism:
    return Homomorphism(s, s, tuple(range(s.n)))


def projection(s: QuantumStructure, k: int) -> Homomorphism:
    """Coordinate projection of a product onto its ``k``-th factor."""
    if s.factors is None:
        raise PreconditionFailed("structure is not a product")
    n2 = s.factors[1].n
    if k == 0:
        mapping = [i // n2 for i in range(s.n)]
    else:
        mapping = [i % n2 for i in range(s.n)]
    return Homomorphism(s, s.factors[k], tuple(mapping))


def jauch_piron_witness(h: Homomorphism, a: int, b: int) -> int:
    """An element ``c >= a, b`` with ``h(c) = 0`` for ``h(a) = 0 = h(b)``.

    Refines ``a + a' = b + b'`` and returns ``c11 + c12 + c21``.
    """
    s = h.source
    if "rdp" not in s.flavor:
        raise PreconditionFailed("source structure is not known to have RDP")
    if h(a) != h.target.zero or h(b) != h.target.zero:
        raise PreconditionFailed("h(a) and h(b) must both be 0")
    m = rdp_refine(s, a, s.comp(a), b, s.comp(b))
    c = summable_sum(s, [m.c11, m.c12, m.c21])
    return c


def mv_lift(h: Homomorphism, A: int, B: int, c: int) -> int:
    """Element ``C`` with ``A <= C <= B`` and ``h(C) = c``.

    Takes the first preimage ``C1`` of ``c`` and returns ``A join (B meet C1)``.
    """
    src, tgt = h.source, h.target
    if "mv" not in src.flavor or "mv" not in tgt.flavor:
        raise PreconditionFailed("both structures must be MV-algebras")
    if not h.surjective:
        raise NotSurjective("homomorphism is not onto")
    if not h.preserves_oplus:
        raise PreconditionFailed("homomorphism does not preserve the MV sum")
    if not src.le(A, B):
        raise PreconditionFailed("need A <= B")
    if not (tgt.le(h(A), c) and tgt.le(c, h(B))):
        raise PreconditionFailed("need h(A) <= c <= h(B)")
    c1 = h.mapping.index(c)
    return src.join(A, src.meet(B, c1))


def summable_sum(s: QuantumStructure, items: Iterable[int]) -> int:
    """Sum of a finite family, folded left in index order."""
    items = sorted(int(a) for a in items)
    if not items:
        raise PreconditionFailed("empty family")
    acc = items[0]
    for i, a in enumerate(items[1:], start=1):
        nxt = s.add(acc, a)
        if nxt is None:
            raise NotSummable(tuple(s.names[x] for x in items[: i + 1]))
        acc = nxt
    return acc


# ---------------------------------------------------------------------------
# pointwise lifting on fuzzy carriers


def _fuzzy_values(s):
    if s.carrier is None:
        raise PreconditionFailed("structure is not a fuzzy carrier")
    return s.values


def pointwise_max(s: QuantumStructure, f: int, g: int) -> int | None:
    vals = _fuzzy_values(s)
    v = tuple(max(x, y) for x, y in zip(vals[f], vals[g]))
    return s._value_index.get(v)


def pointwise_min(s: QuantumStructure, f: int, g: int) -> int | None:
    vals = _fuzzy_values(s)
    v = tuple(min(x, y) for x, y in zip(vals[f], vals[g]))
    return s._value_index.get(v)


def fuzzy_lift(h: Homomorphism, f: int, g: int, c: int) -> int:
    """``max{f, min{g, s1}}`` for the first preimage ``s1`` of ``c``.

    Requires ``f <= g`` pointwise and ``h(f) <= c <= h(g)``; the result
    lies between ``f`` and ``g`` and maps to ``c``.
    """
    s = h.source
    if not s.le(f, g):
        raise PreconditionFailed("need f <= g")
    if not (h.target.le(h(f), c) and h.target.le(c, h(g))):
        raise PreconditionFailed("need h(f) <= c <= h(g)")
    if c not in h.mapping:
        raise NotSurjective(f"{h.target.names[c]} has no preimage")
    s1 = h.mapping.index(c)
    low = pointwise_min(s, g, s1)
    if low is None:
        raise PreconditionFailed("carrier is not closed under pointwise min")
    out = pointwise_max(s, f, low)
    if out is None:
        raise PreconditionFailed("carrier is not closed under pointwise max")
    return out


def restriction(source: QuantumStructure, target: QuantumStructure) -> Homomorphism:
    """Restriction of fuzzy sets (or subsets) to the target's points."""
    if source.carrier is not None:
        om = source.carrier.omega
        keep = [om.index(w) for w in target.carrier.omega]
        return Homomorphism.from_values(source, target, lambda v: tuple(v[i] for i in keep))
    if source.is_power_set and target.is_power_set:
        labels = frozenset(target.labels)
        return Homomorphism.from_values(source, target, lambda v: v & labels)
    raise PreconditionFailed("restriction needs fuzzy or power-set structures")
