"""Finite unions of real intervals with rational endpoints.

Every set is kept in canonical form: pieces sorted, pairwise disjoint and
never touching.  Set operations work on the partition of the line cut out
by the endpoints involved, so they stay exact.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .errors import EmptyIntervalWarning, IntervalSyntaxError, TooLarge

INF = math.inf
Number = Union[Fraction, float]

ALGEBRA_POINT_LIMIT = 12


def to_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def format_number(q) -> str:
    """Integers plainly, terminating decimals as decimals, else ``p/q``."""
    if q == INF:
        return "inf"
    if q == -INF:
        return "-inf"
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    k = max(twos, fives)
    scaled = abs(q.numerator) * 10**k // q.denominator
    digits = str(scaled).rjust(k + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}"


@dataclass(frozen=True, order=True)
class Interval:
    lo: Number
    lo_closed: bool
    hi: Number
    hi_closed: bool

    def __contains__(self, t) -> bool:
        if t < self.lo or t > self.hi:
            return False
        if t == self.lo and not self.lo_closed:
            return False
        if t == self.hi and not self.hi_closed:
            return False
        return True

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self):
        if self.is_point:
            return "{" + format_number(self.lo) + "}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_number(self.lo)},{format_number(self.hi)}{right}"


def _atoms(points):
    """Cells of the partition of the line induced by sorted ``points``.

    Returned as ``(Interval, representative)``; gaps come before, between
    and after the points, each point is its own singleton cell.
    """
    if not points:
        return [(Interval(-INF, False, INF, False), Fraction(0))]
    cells = [(Interval(-INF, False, points[0], False), points[0] - 1)]
    for i, p in enumerate(points):
        cells.append((Interval(p, True, p, True), p))
        if i + 1 < len(points):
            q = points[i + 1]
            cells.append((Interval(p, False, q, False), (p + q) / 2))
    cells.append((Interval(points[-1], False, INF, False), points[-1] + 1))
    return cells


def _merge_cells(cells, included) -> tuple:
    pieces = []
    start = None
    for (cell, _), keep in zip(cells, included):
        if keep and start is None:
            start = cell
            end = cell
        elif keep:
            end = cell
        elif start is not None:
            pieces.append(Interval(start.lo, start.lo_closed, end.hi, end.hi_closed))
            start = None
    if start is not None:
        pieces.append(Interval(start.lo, start.lo_closed, end.hi, end.hi_closed))
    return tuple(pieces)


@dataclass(frozen=True)
class IntervalSet:
    pieces: tuple = ()

    @classmethod
    def from_pieces(cls, pieces: Iterable[Interval]) -> "IntervalSet":
        pieces = [p for p in pieces if not _empty(p)]
        points = _endpoints(pieces)
        cells = _atoms(points)
        included = [any(rep in p for p in pieces) for _, rep in cells]
        return cls(_merge_cells(cells, included))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls((Interval(-INF, False, INF, False),))

    @classmethod
    def below(cls, t) -> "IntervalSet":
        """The open ray ``(-inf, t)``."""
        return cls((Interval(-INF, False, to_rational(t), False),))

    @classmethod
    def singletons(cls, points: Iterable) -> "IntervalSet":
        return cls.from_pieces(Interval(p, True, p, True) for p in map(to_rational, points))

    def __contains__(self, t) -> bool:
        return contains(self, t)

    def __str__(self):
        if not self.pieces:
            return "{}"
        return " U ".join(str(p) for p in self.pieces)

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return intersect(self, other)

    def __sub__(self, other):
        return intersect(self, complement(other))

    def __invert__(self):
        return complement(self)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def is_closed(self) -> bool:
        return all(
            (p.lo == -INF or p.lo_closed) and (p.hi == INF or p.hi_closed) for p in self.pieces
        )

    def issubset(self, other: "IntervalSet") -> bool:
        return intersect(self, other) == self

    def points(self) -> tuple:
        """The points of a finite set; raises for sets with interior."""
        if not all(p.is_point for p in self.pieces):
            raise ValueError(f"{self} is not a finite set of points")
        return tuple(p.lo for p in self.pieces)


def _empty(p: Interval) -> bool:
    if p.lo > p.hi:
        return True
    return p.lo == p.hi and not (p.lo_closed and p.hi_closed)


def _endpoints(pieces) -> list:
    pts = set()
    for p in pieces:
        for x in (p.lo, p.hi):
            if x not in (INF, -INF):
                pts.add(x)
    return sorted(pts)


def _combine(sets, op) -> IntervalSet:
    cells = _atoms(_endpoints(p for s in sets for p in s.pieces))
    included = [op(*(contains(s, rep) for s in sets)) for _, rep in cells]
    return IntervalSet(_merge_cells(cells, included))


def complement(e: IntervalSet) -> IntervalSet:
    return _combine([e], lambda x: not x)


def union(e: IntervalSet, f: IntervalSet) -> IntervalSet:
    return _combine([e, f], lambda x, y: x or y)


def intersect(e: IntervalSet, f: IntervalSet) -> IntervalSet:
    return _combine([e, f], lambda x, y: x and y)


def contains(e: IntervalSet, t) -> bool:
    return any(t in p for p in e.pieces)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[+-]?inf|[+-]?\d+(?:\.\d+)?(?:/\d+)?)|(?P<sym>[()\[\]{},])|(?P<union>U))"
)


def _tokens(text):
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            return
        m = _TOKEN.match(text, pos)
        if not m:
            raise IntervalSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        yield m.lastgroup, m.group(m.lastgroup), start
        pos = m.end()


def _number(tok, pos):
    kind, val, at = tok
    if kind != "num":
        raise IntervalSyntaxError(f"expected a number, got {val!r}", at)
    if val.endswith("inf"):
        return -INF if val.startswith("-") else INF
    return Fraction(val)


def parse_interval_set(text: str) -> IntervalSet:
    """Parse e.g. ``"(-inf,1.5)"``, ``"[0,1) U [1,2)"`` or ``"{1} U {2}"``.

    ``{}`` denotes the empty set.  Pieces with ``lo > hi`` are dropped with
    an :class:`EmptyIntervalWarning`.
    """
    toks = list(_tokens(text))
    if not toks:
        raise IntervalSyntaxError("empty input", 0)
    pieces = []
    i = 0

    def need(sym):
        nonlocal i
        if i >= len(toks):
            raise IntervalSyntaxError(f"expected {sym!r}, got end of input", len(text))
        kind, val, at = toks[i]
        if val not in sym:
            raise IntervalSyntaxError(f"expected {sym!r}, got {val!r}", at)
        i += 1
        return val

    def num():
        nonlocal i
        if i >= len(toks):
            raise IntervalSyntaxError("expected a number, got end of input", len(text))
        tok = toks[i]
        i += 1
        return _number(tok, tok[2])

    while True:
        opener = need("([{")
        if opener == "{":
            if i < len(toks) and toks[i][1] == "}":
                i += 1
            else:
                at = toks[i][2] if i < len(toks) else len(text)
                t = num()
                if t in (INF, -INF):
                    raise IntervalSyntaxError("singleton at infinity", at)
                need("}")
                pieces.append(Interval(t, True, t, True))
        else:
            at = toks[i - 1][2]
            lo = num()
            need(",")
            hi = num()
            closer = need(")]")
            lo_closed = opener == "[" and lo != -INF
            hi_closed = closer == "]" and hi != INF
            if lo > hi:
                warnings.warn(f"dropping empty piece at position {at}", EmptyIntervalWarning, stacklevel=2)
            else:
                pieces.append(Interval(lo, lo_closed, hi, hi_closed))
        if i == len(toks):
            break
        kind, val, at = toks[i]
        if kind != "union":
            raise IntervalSyntaxError(f"expected 'U', got {val!r}", at)
        i += 1
    return IntervalSet.from_pieces(pieces)


# ---------------------------------------------------------------------------
# finite algebra separating a set of points


def algebra_atoms(points: Iterable) -> list[IntervalSet]:
    """Atoms of the finite algebra generated by the singletons of ``points``
    and the open gaps between them, in left-to-right order."""
    pts = sorted(set(map(to_rational, points)))
    if len(pts) > ALGEBRA_POINT_LIMIT:
        raise TooLarge(f"{len(pts)} points (limit {ALGEBRA_POINT_LIMIT})")
    return [IntervalSet((cell,)) for cell, _ in _atoms(pts)]


def set_for_mask(atoms: list[IntervalSet], mask: int) -> IntervalSet:
    """Union of the atoms selected by the bits of ``mask``."""
    cells = [(a.pieces[0], None) for a in atoms]
    return IntervalSet(_merge_cells(cells, [bool(mask >> i & 1) for i in range(len(atoms))]))


def generated_algebra(points: Iterable) -> Iterator[IntervalSet]:
    """All ``2**k`` unions of atoms, ordered by atom bitmask."""
    atoms = algebra_atoms(points)
    for mask in range(1 << len(atoms)):
        yield set_for_mask(atoms, mask)
