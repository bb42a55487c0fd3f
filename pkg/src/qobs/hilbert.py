"""Effect operators on a finite-dimensional Hilbert space.

Operators are numpy arrays; every validation reports the residual it
achieved next to the verdict.  Tolerances apply to matrices whose entries
have magnitude at most one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, FamilyInvalid, NotEffect, NotUnitVector, PreconditionFailed

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_SUM = 1e-9


def _matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def herm_residual(m: np.ndarray) -> float:
    return float(np.abs(m - m.conj().T).max()) if m.size else 0.0


def eigenvalues(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of the Hermitian part, ascending."""
    return np.linalg.eigvalsh((m + m.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class EffectOperator:
    matrix: np.ndarray = field(repr=False)
    herm_residual: float
    min_eig: float
    max_eig: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def effect(a) -> EffectOperator:
    """Validate ``0 <= A <= I``."""
    m = _matrix(a)
    r = herm_residual(m)
    if r > TOL_HERM:
        raise NotEffect(f"not Hermitian (residual {r:.3g})")
    ev = eigenvalues(m)
    if ev[0] < -TOL_PSD or ev[-1] > 1 + TOL_PSD:
        raise NotEffect(f"eigenvalues [{ev[0]:.12g}, {ev[-1]:.12g}] leave [0, 1]")
    m.setflags(write=False)
    return EffectOperator(m, r, float(ev[0]), float(ev[-1]))


def _as_matrix(a) -> np.ndarray:
    return a.matrix if isinstance(a, EffectOperator) else _matrix(a)


def loewner_leq(a, b) -> bool:
    """``A <= B`` in the operator order: ``B - A`` positive semidefinite."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"{ma.shape} vs {mb.shape}")
    return bool(eigenvalues(mb - ma)[0] >= -TOL_PSD)


@dataclass(frozen=True)
class OperatorSpectralFamily:
    """Jump points with cumulative effects ``C_i``; ``C_k`` should be ``I``."""

    dim: int
    jumps: tuple  # ((t, EffectOperator), ...)

    def value_at(self, t) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for ti, c in self.jumps:
            if ti < t:
                out = c.matrix
            else:
                break
        return out


def operator_family(jumps: Sequence) -> OperatorSpectralFamily:
    """Wrap ``(t, matrix)`` pairs; each cumulative value must be an effect."""
    if not jumps:
        raise FamilyInvalid("family has no jumps")
    out = []
    for t, m in jumps:
        try:
            out.append((float(t), m if isinstance(m, EffectOperator) else effect(m)))
        except NotEffect as exc:
            raise FamilyInvalid(f"cumulative value is not an effect: {exc}", t) from None
    dims = {c.dim for _, c in out}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
    return OperatorSpectralFamily(dims.pop(), tuple(out))


@dataclass(frozen=True)
class Povm:
    dim: int
    atoms: tuple  # ((t, EffectOperator), ...)
    sum_residual: float

    @property
    def points(self) -> tuple:
        return tuple(t for t, _ in self.atoms)


def _sum_residual(mats, dim) -> float:
    total = sum((m for m in mats), np.zeros((dim, dim), dtype=complex))
    return float(np.abs(total - np.eye(dim)).max())


def make_povm(atoms: Sequence) -> Povm:
    effs = [(float(t), m if isinstance(m, EffectOperator) else effect(m)) for t, m in atoms]
    if not effs:
        raise PreconditionFailed("a POVM needs at least one atom")
    dim = effs[0][1].dim
    if any(e.dim != dim for _, e in effs):
        raise DimensionMismatch("atoms have different dimensions")
    if len({t for t, _ in effs}) != len(effs):
        raise PreconditionFailed("duplicate outcome")
    r = _sum_residual([e.matrix for _, e in effs], dim)
    if r > TOL_SUM:
        raise PreconditionFailed(f"atoms sum to I only within {r:.3g}")
    return Povm(dim, tuple(sorted(effs, key=lambda p: p[0])), r)


def reconstruct_povm(f: OperatorSpectralFamily) -> Povm:
    """Atoms ``X_i = C_i - C_{i-1}``; each is re-validated as an effect."""
    prev_t = None
    prev = np.zeros((f.dim, f.dim), dtype=complex)
    atoms = []
    for t, c in f.jumps:
        if prev_t is not None and not t > prev_t:
            raise FamilyInvalid("jump points not strictly increasing", t)
        d = c.matrix - prev
        ev = eigenvalues(d)
        if ev[0] < -TOL_PSD:
            raise FamilyInvalid(f"difference not positive semidefinite (eigenvalue {ev[0]:.12g})", t)
        atoms.append((t, effect(d)))
        prev, prev_t = c.matrix, t
    r = float(np.abs(prev - np.eye(f.dim)).max())
    if r > TOL_HERM:
        raise FamilyInvalid(f"last cumulative value differs from I by {r:.3g}", prev_t)
    return Povm(f.dim, tuple(atoms), _sum_residual([e.matrix for _, e in atoms], f.dim))


def _unit(phi) -> np.ndarray:
    v = np.asarray(phi, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1) > TOL_SUM:
        raise NotUnitVector(f"norm {norm:.12g}")
    return v


def fuzzy_value(a, phi) -> float:
    """``(A phi, phi)``, the value of ``A`` as a fuzzy set on unit vectors."""
    m = _as_matrix(a)
    v = _unit(phi)
    if v.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"vector of length {v.shape[0]} for dim {m.shape[0]}")
    val = float(np.real(np.vdot(v, m @ v)))
    return min(1.0, max(0.0, val))


@dataclass(frozen=True)
class StepFunction:
    """Nondecreasing left-continuous step function from 0 to 1."""

    points: tuple
    levels: tuple
    jumps: tuple

    def __call__(self, t) -> float:
        out = 0.0
        for ti, lv in zip(self.points, self.levels):
            if ti < t:
                out = lv
            else:
                break
        return out


def distribution_function(f: OperatorSpectralFamily, phi) -> StepFunction:
    """``t -> (x_t phi, phi)`` for the family ``f``."""
    v = _unit(phi)
    levels = [float(np.real(np.vdot(v, c.matrix @ v))) for _, c in f.jumps]
    jumps = [b - a for a, b in zip([0.0] + levels, levels)]
    return StepFunction(tuple(t for t, _ in f.jumps), tuple(levels), tuple(jumps))


@dataclass(frozen=True, eq=False)
class DensityState:
    rho: np.ndarray = field(repr=False)
    trace_residual: float
    min_eig: float

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def density(rho) -> DensityState:
    m = _matrix(rho)
    r = herm_residual(m)
    if r > TOL_HERM:
        raise NotEffect(f"density matrix not Hermitian (residual {r:.3g})")
    tr = abs(complex(np.trace(m)) - 1)
    if tr > TOL_SUM:
        raise NotEffect(f"trace differs from 1 by {tr:.3g}")
    ev = eigenvalues(m)
    if ev[0] < -TOL_PSD:
        raise NotEffect(f"density matrix has eigenvalue {ev[0]:.12g}")
    m.setflags(write=False)
    return DensityState(m, tr, float(ev[0]))


@dataclass(frozen=True)
class Statistics:
    probabilities: tuple  # ((t, p), ...)
    expectation: float
    moments: tuple  # k-th moment at index k-1
    sum_residual: float


def povm_statistics(p: Povm, rho: DensityState, k: int = 2) -> Statistics:
    """Outcome probabilities ``tr(rho X_i)``, the mean, and moments 1..k."""
    if p.dim != rho.dim:
        raise DimensionMismatch(f"POVM dim {p.dim} vs state dim {rho.dim}")
    probs = []
    for t, e in p.atoms:
        val = float(np.real(np.trace(rho.rho @ e.matrix)))
        if val < -TOL_PSD:
            raise PreconditionFailed(f"negative probability {val:.3g} at {t}")
        probs.append((t, max(val, 0.0)))
    resid = abs(sum(q for _, q in probs) - 1)
    moments = tuple(sum(t**j * q for t, q in probs) for j in range(1, k + 1))
    return Statistics(tuple(probs), moments[0] if moments else sum(t * q for t, q in probs), moments, resid)


def diagonal_embedding(x, dim: int | None = None) -> Povm:
    """Diagonal POVM for an observable on a chain, product of chains or
    fuzzy carrier.

    Rational element values become scalar multiples of the identity (of
    size ``dim``, default 1); tuples of rationals become diagonals.
    """
    s = x.structure
    if s.values is None:
        raise PreconditionFailed("structure carries no numeric element values")
    atoms = []
    for t, a in x.atoms:
        v = s.values[a]
        if isinstance(v, Fraction):
            m = float(v) * np.eye(dim or 1)
        elif isinstance(v, tuple) and all(isinstance(c, Fraction) for c in v):
            m = np.diag([float(c) for c in v])
        else:
            raise PreconditionFailed(f"element value {v!r} is not numeric")
        atoms.append((float(t), m))
    return make_povm(atoms)
