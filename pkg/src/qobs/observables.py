"""Observables with finite spectrum and their spectral families.

An observable is a finite list of ``(t, a)`` atoms whose effects sum to
``1``; its value on a set ``E`` of reals is the sum of the effects sitting
at points of ``E``.  Exhaustive checks run over the finite algebra of
interval sets generated by the spectrum points (see
:func:`qobs.intervals.algebra_atoms`), indexed by atom bitmask.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import (
    DuplicatePoint,
    FamilyInvalid,
    JauchPironFailed,
    MeetUndefined,
    NotSummable,
    PartialFunction,
    PreconditionFailed,
    StructureMismatch,
    TotalNotOne,
)
from .intervals import IntervalSet, algebra_atoms, set_for_mask, to_rational
from .structure import UNDEF, QuantumStructure, blocks, sharp_elements, summable_sum


def _element(s: QuantumStructure, a) -> int:
    return s.element(a) if isinstance(a, str) else int(a)


@dataclass(frozen=True)
class Observable:
    structure: QuantumStructure = field(repr=False)
    atoms: tuple

    @property
    def points(self) -> tuple:
        return tuple(t for t, _ in self.atoms)

    @property
    def effects(self) -> tuple:
        return tuple(a for _, a in self.atoms)

    def __call__(self, e: IntervalSet) -> int:
        return evaluate(self, e)

    def describe(self) -> str:
        s = self.structure
        return ", ".join(f"({t}, {s.names[a]})" for t, a in self.atoms)


def make_observable(s: QuantumStructure, atoms: Iterable) -> Observable:
    """Canonical observable from ``(t, effect)`` pairs.

    Effects may be element ids or names.  Zero effects are dropped and
    the atoms sorted by point.
    """
    pairs = [(to_rational(t), _element(s, a)) for t, a in atoms]
    seen = set()
    for t, _ in pairs:
        if t in seen:
            raise DuplicatePoint(f"spectrum point {t} appears twice")
        seen.add(t)
    if not pairs:
        raise TotalNotOne("an observable needs at least one atom")
    total = summable_sum(s, [a for _, a in pairs])
    if total != s.one:
        raise TotalNotOne(f"effects sum to {s.names[total]}, not 1")
    canon = tuple(sorted((t, a) for t, a in pairs if a != s.zero))
    return Observable(s, canon)


def question(s: QuantumStructure, a) -> Observable:
    """Two-valued observable with ``x({0}) = a`` and ``x({1}) = a'``."""
    a = _element(s, a)
    return make_observable(s, [(0, a), (1, s.comp(a))])


def point_mass(s: QuantumStructure, t) -> Observable:
    return make_observable(s, [(t, s.one)])


def evaluate(x: Observable, e: IntervalSet) -> int:
    s = x.structure
    hits = [a for t, a in x.atoms if t in e]
    return summable_sum(s, hits) if hits else s.zero


# ---------------------------------------------------------------------------
# exhaustive evaluation over the generated algebra


def algebra_points(*observables: Observable) -> list:
    return sorted({t for x in observables for t in x.points})


def algebra_values(x: Observable, points=None) -> np.ndarray:
    """``x`` evaluated on every member of the algebra generated by
    ``points`` (default: the spectrum of ``x``), indexed by atom bitmask.

    Points outside the spectrum carry the zero effect.  The result is
    built by adding one atom at a time, so it costs one table lookup per
    member.
    """
    s = x.structure
    pts = sorted(set(points)) if points is not None else list(x.points)
    effect_at = dict(x.atoms)
    missing = set(effect_at) - set(pts)
    if missing:
        raise PreconditionFailed(f"points {sorted(missing)} of the spectrum are not in the grid")
    # atoms alternate gap, point, gap, ..., gap
    cell_effects = [s.zero]
    for p in pts:
        cell_effects += [effect_at.get(p, s.zero), s.zero]
    vals = np.array([s.zero], dtype=np.int32)
    for e in cell_effects:
        vals = np.concatenate([vals, s.plus[vals, e]])
    if (vals == UNDEF).any():
        raise NotSummable((), "sub-family of a summable family failed to sum")
    return vals


def range_of(x: Observable) -> frozenset:
    """The set of all values ``x(E)``."""
    return frozenset(int(v) for v in np.unique(algebra_values(x)))


# ---------------------------------------------------------------------------
# spectral families


@dataclass(frozen=True)
class SpectralFamily:
    """Left-continuous step family ``t -> x_t``.

    ``jumps`` holds ``(t_i, c_i)`` with strictly increasing ``t_i``;
    ``x_t`` is ``0`` for ``t <= t_1`` and ``c_i`` for ``t`` in
    ``(t_i, t_{i+1}]``.  The last cumulative value is ``1``.
    """

    structure: QuantumStructure = field(repr=False)
    jumps: tuple

    def value_at(self, t) -> int:
        t = to_rational(t)
        out = self.structure.zero
        for ti, c in self.jumps:
            if ti < t:
                out = c
            else:
                break
        return out

    def canonical(self) -> "SpectralFamily":
        """Drop jumps that do not change the cumulative value."""
        s = self.structure
        out = []
        prev = s.zero
        for t, c in self.jumps:
            if c != prev:
                out.append((t, c))
            prev = c
        return SpectralFamily(s, tuple(out))

    def describe(self) -> str:
        s = self.structure
        return ", ".join(f"({t}, {s.names[c]})" for t, c in self.jumps)


@dataclass
class FamilyReport:
    increasing: bool = True
    monotone: bool = True
    normalized: bool = True
    # the infimum 0 and left-continuity hold by the step representation
    bottom: str = "representational"
    left_continuous: str = "representational"
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.increasing and self.monotone and self.normalized


def check_family_axioms(s: QuantumStructure, jumps: Iterable) -> FamilyReport:
    """Check a raw jump list.

    Monotonicity requires every difference ``c_i - c_{i-1}`` to exist;
    normalization requires the last cumulative value to be ``1``.
    """
    rep = FamilyReport()
    pairs = [(to_rational(t), _element(s, c)) for t, c in jumps]
    if not pairs:
        rep.normalized = False
        rep.problems.append(("normalized", None, "no jumps: supremum is 0, not 1"))
        return rep
    for (t0, _), (t1, _) in zip(pairs, pairs[1:]):
        if not t0 < t1:
            rep.increasing = False
            rep.problems.append(("increasing", t1, f"jump points not strictly increasing at {t1}"))
    prev = s.zero
    for t, c in pairs:
        if not s.le(prev, c):
            rep.monotone = False
            rep.problems.append(("monotone", t, f"{s.names[prev]} is not below {s.names[c]} at t={t}"))
        prev = c
    if pairs[-1][1] != s.one:
        rep.normalized = False
        rep.problems.append(("normalized", pairs[-1][0], f"supremum is {s.names[pairs[-1][1]]}, not 1"))
    return rep


def make_family(s: QuantumStructure, jumps: Iterable) -> SpectralFamily:
    pairs = [(to_rational(t), _element(s, c)) for t, c in jumps]
    rep = check_family_axioms(s, pairs)
    if not rep.ok:
        kind, at, msg = rep.problems[0]
        raise FamilyInvalid(msg, at)
    return SpectralFamily(s, tuple(pairs))


def spectral_family(x: Observable) -> SpectralFamily:
    s = x.structure
    jumps = []
    acc = s.zero
    for t, a in x.atoms:
        acc = s.add(acc, a)
        jumps.append((t, acc))
    return SpectralFamily(s, tuple(jumps))


def supporting_block(f: SpectralFamily) -> frozenset | None:
    """First block containing every cumulative value of ``f``."""
    need = {c for _, c in f.jumps} | {f.structure.zero}
    for blk in blocks(f.structure):
        if need <= blk:
            return blk
    return None


def reconstruct(f: SpectralFamily) -> Observable:
    """The observable whose rays ``(-inf, t)`` take the values of ``f``.

    Atoms are the successive differences of the cumulative values.  On
    lattice structures that are not MV-algebras the family is first
    located inside a block, where the differences are computed.
    """
    s = f.structure
    rep = check_family_axioms(s, f.jumps)
    if not rep.ok:
        kind, at, msg = rep.problems[0]
        raise FamilyInvalid(msg, at)
    if "lattice" in s.flavor and "mv" not in s.flavor:
        blk = supporting_block(f)
        if blk is None:
            raise FamilyInvalid("no block contains the whole family")
    atoms = []
    prev = s.zero
    for t, c in f.jumps:
        d = s.sub(c, prev)
        if d != s.zero:
            atoms.append((t, d))
        prev = c
    return make_observable(s, atoms)


@dataclass(frozen=True)
class Agreement:
    agree: bool
    witness: IntervalSet | None = None

    def __bool__(self):
        return self.agree


def uniqueness_oracle(x: Observable, y: Observable) -> Agreement:
    """Compare ``x`` and ``y`` on every member of the algebra generated by
    the union of their spectra; on disagreement return the first
    differing set."""
    if x.structure is not y.structure:
        raise StructureMismatch("observables live on different structures")
    pts = algebra_points(x, y)
    vx = algebra_values(x, pts)
    vy = algebra_values(y, pts)
    diff = np.flatnonzero(vx != vy)
    if len(diff) == 0:
        return Agreement(True)
    return Agreement(False, set_for_mask(algebra_atoms(pts), int(diff[0])))


def ray_grid(*observables: Observable) -> list:
    """Spectrum points, their midpoints, and one point beyond each end."""
    pts = algebra_points(*observables)
    if not pts:
        return [Fraction(0)]
    grid = [pts[0] - 1, *pts, pts[-1] + 1]
    grid += [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    return sorted(grid)


def agree_on_rays(x: Observable, y: Observable, grid=None) -> bool:
    grid = ray_grid(x, y) if grid is None else grid
    return all(evaluate(x, IntervalSet.below(t)) == evaluate(y, IntervalSet.below(t)) for t in grid)


# ---------------------------------------------------------------------------
# Boolean case


@dataclass(frozen=True)
class PointFunction:
    carrier: tuple
    values: Mapping

    def __call__(self, label):
        return self.values[label]


def _require_power_set(s):
    if "boolean" not in s.flavor or not s.is_power_set:
        raise PreconditionFailed("structure must be a power-set Boolean algebra")


def boolean_point_function(f: SpectralFamily) -> PointFunction:
    """Point function whose value at a label is the first jump point whose
    cumulative set contains it."""
    s = f.structure
    _require_power_set(s)
    vals = {}
    for label in s.labels:
        vals[label] = min(t for t, c in f.jumps if label in s.values[c])
    return PointFunction(tuple(s.labels), vals)


def preimage_observable(pf: PointFunction, s: QuantumStructure) -> Observable:
    """``E -> {w : f(w) in E}`` as an observable on the power set."""
    _require_power_set(s)
    groups: dict = {}
    for label in pf.carrier:
        groups.setdefault(pf(label), set()).add(label)
    return make_observable(s, [(t, s.index_of_value(frozenset(g))) for t, g in groups.items()])


def _pair_masks(count):
    m = np.arange(count)
    return m[:, None], m[None, :]


def is_boolean_sigma_hom(x: Observable) -> bool:
    """Whether ``x(E & F) = x(E) meet x(F)`` across the generated algebra."""
    s = x.structure
    if "boolean" not in s.flavor:
        raise PreconditionFailed("structure is not Boolean")
    vals = algebra_values(x)
    m1, m2 = _pair_masks(len(vals))
    return bool((s.meet_table[vals[:, None], vals[None, :]] == vals[m1 & m2]).all())


# ---------------------------------------------------------------------------
# sharpness, Jauch-Piron, spectrum


def is_sharp(x: Observable) -> bool:
    return range_of(x) <= sharp_elements(x.structure)


def preserves_finite_intersections(x: Observable) -> bool:
    """Whether every ``x(E) meet x(F)`` exists and equals ``x(E & F)``.

    Raises :class:`MeetUndefined` naming the first pair of sets whose
    values have no meet.
    """
    s = x.structure
    vals = algebra_values(x)
    meets = s.meet_table[vals[:, None], vals[None, :]]
    m1, m2 = _pair_masks(len(vals))
    undefined = np.argwhere(meets == UNDEF)
    if len(undefined):
        atoms = algebra_atoms(x.points)
        i, j = map(int, undefined[0])
        raise MeetUndefined((str(set_for_mask(atoms, i)), str(set_for_mask(atoms, j))))
    return bool((meets == vals[m1 & m2]).all())


def jauch_piron_check(x: Observable) -> bool:
    """``x(E) = 1 = x(F)`` implies ``x(E & F) = 1`` over the generated algebra."""
    vals = algebra_values(x)
    full = np.flatnonzero(vals == x.structure.one)
    return bool((vals[full[:, None] & full[None, :]] == x.structure.one).all())


def spectrum(x: Observable) -> IntervalSet:
    """Least closed set of full measure; for a canonical finite observable
    this is its set of points."""
    if not jauch_piron_check(x):
        raise JauchPironFailed("observable lacks the Jauch-Piron property")
    sigma = IntervalSet.singletons(x.points)
    if evaluate(x, sigma) != x.structure.one:
        raise JauchPironFailed("spectrum does not carry full measure")
    return sigma


def functional_calculus(x: Observable, f: Mapping | Callable) -> Observable:
    """``f(x)``: the effect at ``u`` is the sum of effects at points mapped to ``u``."""
    table = f if isinstance(f, Mapping) else {t: f(t) for t in x.points}
    table = {to_rational(k): v for k, v in table.items()}
    groups: dict = {}
    for t, a in x.atoms:
        if t not in table:
            raise PartialFunction(t)
        groups.setdefault(to_rational(table[t]), []).append(a)
    s = x.structure
    return make_observable(s, [(u, summable_sum(s, effs)) for u, effs in groups.items()])


# ---------------------------------------------------------------------------
# effect-tribe view


def pointwise_distribution(x: Observable, point) -> list:
    """The probability distribution ``t -> x({t})(w)`` at one carrier point."""
    s = x.structure
    if s.carrier is None:
        raise PreconditionFailed("structure is not a fuzzy carrier")
    i = s.carrier.omega.index(str(point))
    return [(t, s.values[a][i]) for t, a in x.atoms]


def pointwise_probability(x: Observable, e: IntervalSet, point) -> Fraction:
    return sum((p for t, p in pointwise_distribution(x, point) if t in e), Fraction(0))
