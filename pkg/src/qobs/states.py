"""States on finite structures, the state polytope, and observable statistics."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    EmptyStateSpace,
    NotAdditive,
    OutOfRange,
    PartialFunction,
    StructureMismatch,
    TooLarge,
    UnitNotOne,
)
from .intervals import to_rational
from .observables import Observable
from .structure import QuantumStructure

POLYTOPE_ELEMENT_LIMIT = 64
MAX_BASES = 2_000_000
_BATCH = 4096
_TOL = 1e-9


@dataclass(frozen=True)
class State:
    structure: QuantumStructure = field(repr=False)
    values: tuple

    def __call__(self, a) -> Fraction:
        if isinstance(a, str):
            a = self.structure.element(a)
        return self.values[a]

    def describe(self) -> str:
        s = self.structure
        return ", ".join(f"{s.names[i]}={v}" for i, v in enumerate(self.values))


def validate_state(s: QuantumStructure, values) -> State:
    """Check range, normalization and additivity exhaustively.

    ``values`` is a sequence indexed by element id or a mapping keyed by
    element id or name; it must be total.
    """
    if isinstance(values, Mapping):
        table = {}
        for k, v in values.items():
            table[s.element(k) if isinstance(k, str) else int(k)] = to_rational(v)
        missing = [s.names[a] for a in range(s.n) if a not in table]
        if missing:
            raise OutOfRange(f"no value given for {missing}")
        vals = tuple(table[a] for a in range(s.n))
    else:
        vals = tuple(to_rational(v) for v in values)
        if len(vals) != s.n:
            raise OutOfRange(f"expected {s.n} values, got {len(vals)}")
    for a, v in enumerate(vals):
        if not 0 <= v <= 1:
            raise OutOfRange(f"s({s.names[a]}) = {v} is outside [0,1]")
    if vals[s.one] != 1:
        raise UnitNotOne(f"s(1) = {vals[s.one]}")
    for a, b in np.argwhere(s.plus >= 0):
        a, b = int(a), int(b)
        if a <= b and vals[a] + vals[b] != vals[int(s.plus[a, b])]:
            raise NotAdditive((s.names[a], s.names[b]))
    return State(s, vals)


def mix(s1: State, s2: State, lam) -> State:
    """The convex combination ``lam*s1 + (1-lam)*s2``."""
    lam = to_rational(lam)
    return State(s1.structure, tuple(lam * a + (1 - lam) * b for a, b in zip(s1.values, s2.values)))


# ---------------------------------------------------------------------------
# exact linear algebra


def _rref(rows: list[list[Fraction]], ncols: int):
    """Reduced row echelon form in place; returns the pivot columns."""
    pivots = []
    r = 0
    for col in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                k = rows[i][col]
                rows[i] = [a - k * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def _solve_square(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    d = len(b)
    rows = [list(a[i]) + [b[i]] for i in range(d)]
    piv = _rref(rows, d)
    if len(piv) < d:
        return None
    return [rows[i][d] for i in range(d)]


def _equations(s: QuantumStructure):
    """Rows ``(coeffs, rhs)`` of the additivity system."""
    eqs = []
    one = [0] * s.n
    one[s.one] = 1
    eqs.append((one, 1))
    for a, b in np.argwhere(s.plus >= 0):
        a, b = int(a), int(b)
        if a > b:
            continue
        c = int(s.plus[a, b])
        row = [0] * s.n
        row[a] += 1
        row[b] += 1
        row[c] -= 1
        if any(row):
            eqs.append((row, 0))
    return eqs


def _parametrize(s: QuantumStructure):
    """Affine parametrization ``values = base + basis @ y`` of all
    solutions of the additivity system, or ``None`` if there are none.

    Independent equations are picked numerically, solved exactly, and the
    full system is then verified exactly; any equation the numerical pick
    missed is added and the solve repeated.
    """
    eqs = _equations(s)
    n = s.n
    mat = np.array([row + [rhs] for row, rhs in eqs], dtype=float)
    _, rdiag, perm = scipy.linalg.qr(mat.T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(rdiag))
    rank = int((diag > 1e-9 * max(diag.max(), 1.0)).sum())
    chosen = [int(i) for i in perm[:rank]]
    while True:
        rows = [[Fraction(v) for v in eqs[i][0]] + [Fraction(eqs[i][1])] for i in chosen]
        piv = _rref(rows, n + 1)
        if n in piv:
            return None
        free = [j for j in range(n) if j not in piv]
        base = [Fraction(0)] * n
        basis = [[Fraction(0)] * len(free) for _ in range(n)]
        for r, p in enumerate(piv):
            base[p] = rows[r][n]
            for k, j in enumerate(free):
                basis[p][k] = -rows[r][j]
        for k, j in enumerate(free):
            basis[j][k] = Fraction(1)
        bad = None
        for i, (row, rhs) in enumerate(eqs):
            lhs = sum(c * base[j] for j, c in enumerate(row) if c)
            if lhs != rhs or any(
                sum(c * basis[j][k] for j, c in enumerate(row) if c) for k in range(len(free))
            ):
                bad = i
                break
        if bad is None:
            return base, basis, free
        chosen.append(bad)


@dataclass
class StatePolytope:
    """All states of a structure as ``base + basis @ y`` inside the unit box.

    ``free_coordinates`` are the elements whose values parametrize the
    solution set of the additivity equations.
    """

    structure: QuantumStructure
    free_coordinates: tuple
    base: tuple | None
    basis: tuple | None

    @property
    def dimension(self) -> int:
        return len(self.free_coordinates)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def unique(self) -> State | None:
        """The only state, when the polytope is a single point."""
        if len(self.vertices) == 1 and self.dimension == 0:
            return self.vertices[0]
        return None

    def state_at(self, y: Sequence) -> State:
        vals = tuple(
            b + sum((c * v for c, v in zip(row, y)), Fraction(0)) for b, row in zip(self.base, self.basis)
        )
        return validate_state(self.structure, vals)

    @cached_property
    def vertices(self) -> list:
        if self.base is None:
            return []
        return _enumerate_vertices(self)


def state_polytope(s: QuantumStructure) -> StatePolytope:
    if s.n > POLYTOPE_ELEMENT_LIMIT:
        raise TooLarge(f"{s.n} elements (limit {POLYTOPE_ELEMENT_LIMIT})")
    sol = _parametrize(s)
    if sol is None:
        return StatePolytope(s, (), None, None)
    base, basis, free = sol
    return StatePolytope(s, tuple(free), tuple(base), tuple(tuple(r) for r in basis))


def _enumerate_vertices(poly: StatePolytope) -> list:
    s = poly.structure
    d = poly.dimension
    base, basis = poly.base, poly.basis
    constant = [j for j in range(s.n) if not any(basis[j])]
    if any(not 0 <= base[j] <= 1 for j in constant):
        return []
    if d == 0:
        return [validate_state(s, base)]
    # distinct non-constant constraint rows
    rows = sorted({(basis[j], base[j]) for j in range(s.n) if any(basis[j])})
    m = len(rows)
    if m < d:
        return []
    if math.comb(m, d) > MAX_BASES:
        raise TooLarge(f"{math.comb(m, d)} candidate bases exceed {MAX_BASES}")
    rf = np.array([[float(v) for v in r] for r, _ in rows])
    of = np.array([float(b) for _, b in rows])
    all_rf = np.array([[float(v) for v in r] for r in basis])
    all_of = np.array([float(b) for b in base])
    sides = np.array(list(itertools.product((0.0, 1.0), repeat=d))).T  # (d, 2**d)
    candidates = {}
    combos = itertools.combinations(range(m), d)
    while True:
        chunk = np.array(list(itertools.islice(combos, _BATCH)), dtype=np.intp)
        if len(chunk) == 0:
            break
        a = rf[chunk]  # (B, d, d)
        ok = np.abs(np.linalg.det(a)) > 1e-9
        if not ok.any():
            continue
        chunk, a = chunk[ok], a[ok]
        rhs = sides[None, :, :] - of[chunk][:, :, None]
        y = np.linalg.solve(a, rhs)  # (B, d, P)
        vals = all_of[None, :, None] + np.einsum("jd,bdp->bjp", all_rf, y)
        feas = ((vals >= -_TOL) & (vals <= 1 + _TOL)).all(axis=1)
        for bi, pi in np.argwhere(feas):
            key = tuple(np.round(vals[bi, :, pi], 9))
            if key not in candidates:
                candidates[key] = (chunk[bi], sides[:, pi])
    out = {}
    for combo, side in candidates.values():
        a = [list(rows[i][0]) for i in combo]
        b = [Fraction(int(v)) - rows[i][1] for i, v in zip(combo, side)]
        y = _solve_square(a, b)
        if y is None:
            continue
        vals = tuple(
            base[j] + sum((c * v for c, v in zip(basis[j], y)), Fraction(0)) for j in range(s.n)
        )
        if all(0 <= v <= 1 for v in vals):
            out[vals] = State(s, vals)
    return [out[k] for k in sorted(out)]


def hat(poly: StatePolytope, a):
    """The evaluation functional ``s -> s(a)`` on the state space."""
    if poly.is_empty:
        raise EmptyStateSpace("structure has no states")
    if isinstance(a, str):
        a = poly.structure.element(a)

    def functional(state: State) -> Fraction:
        return state.values[a]

    return functional


# ---------------------------------------------------------------------------
# statistics of observables


def distribution(state: State, x: Observable) -> list:
    """Probabilities ``s(a_n)`` at the spectrum points; null points dropped."""
    if state.structure is not x.structure:
        raise StructureMismatch("state and observable live on different structures")
    return [(t, state.values[a]) for t, a in x.atoms if state.values[a] != 0]


def expectation(state: State, x: Observable, f: Mapping | None = None) -> Fraction:
    total = Fraction(0)
    for t, p in distribution(state, x):
        if f is None:
            v = t
        else:
            key = t if t in f else next((k for k in f if to_rational(k) == t), None)
            if key is None:
                raise PartialFunction(t)
            v = to_rational(f[key])
        total += v * p
    return total


def moment(state: State, x: Observable, k: int) -> Fraction:
    return sum((t**k * p for t, p in distribution(state, x)), Fraction(0))


def sample(state: State, x: Observable, n: int, seed: int = 0) -> list:
    """``n`` outcomes drawn from the distribution of ``x`` in ``state``."""
    if n < 1:
        raise ValueError("n must be positive")
    dist = distribution(state, x)
    rng = np.random.default_rng(seed)
    probs = np.array([float(p) for _, p in dist])
    idx = rng.choice(len(dist), size=n, p=probs / probs.sum())
    return [dist[i][0] for i in idx]
