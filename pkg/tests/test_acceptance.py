"""Acceptance suite: one marked test per criterion, summarized at the end
of the run as ``criterion N: PASS|FAIL``."""

import itertools
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy

from generators import random_observable, random_povm_atoms, random_unit, structure_zoo
from qobs import hilbert
from qobs.cli import run
from qobs.errors import NoRefinement
from qobs.intervals import IntervalSet
from qobs.observables import (
    agree_on_rays,
    boolean_point_function,
    functional_calculus,
    is_boolean_sigma_hom,
    is_sharp,
    jauch_piron_check,
    make_family,
    make_observable,
    preimage_observable,
    preserves_finite_intersections,
    range_of,
    ray_grid,
    reconstruct,
    spectral_family,
    uniqueness_oracle,
)
from qobs.states import distribution, expectation, moment, state_polytope, validate_state
from qobs.structure import (
    identity,
    is_subalgebra,
    jauch_piron_witness,
    make_chain,
    make_fuzzy,
    make_mo,
    make_power_set,
    product,
    projection,
    rdp_refine,
    restriction,
)

from golden_cases import CASES, facts_in_text

ROOT = Path(__file__).resolve().parent.parent
ZOO = structure_zoo()
criterion = pytest.mark.criterion


@criterion(1, "worked example: range and subalgebra test")
def test_c01_worked_example():
    s = make_chain(5)
    x = make_observable(s, [(1, "1/5"), (2, "4/5")])
    r = range_of(x)
    assert {s.names[a] for a in r} == {"0", "1/5", "4/5", "1"}
    assert is_subalgebra(s, r) is False


@criterion(2, "reconstruction round trip on 240 random observables")
def test_c02_round_trip():
    rng = random.Random(2)
    names = sorted(ZOO)
    count = 0
    for i in range(240):
        s = ZOO[names[i % len(names)]]
        x = random_observable(rng, s)
        y = reconstruct(spectral_family(x))
        assert y == x
        assert uniqueness_oracle(x, y)
        count += 1
    assert count >= 200


@criterion(3, "uniqueness converse on 150 random distinct pairs")
def test_c03_uniqueness_converse():
    rng = random.Random(3)
    names = sorted(ZOO)
    pairs = 0
    while pairs < 150:
        s = ZOO[rng.choice(names)]
        x, y = random_observable(rng, s), random_observable(rng, s)
        if x.atoms == y.atoms:
            continue
        assert not uniqueness_oracle(x, y)
        grid = ray_grid(x, y)
        assert all(t.denominator and isinstance(t, Fraction) for t in grid)
        assert not agree_on_rays(x, y, grid)
        fx, fy = spectral_family(x), spectral_family(y)
        assert any(fx.value_at(t) != fy.value_at(t) for t in grid)
        pairs += 1


def _random_point_family(rng, s):
    labels = sorted(s.labels)
    values = {w: Fraction(rng.randint(-6, 6), rng.choice((1, 2))) for w in labels}
    jumps = []
    for t in sorted(set(values.values())):
        below = frozenset(w for w in labels if values[w] <= t)
        jumps.append((t, s.index_of_value(below)))
    return values, make_family(s, jumps)


@criterion(4, "Boolean case: point functions on power sets")
def test_c04_boolean_case():
    rng = random.Random(4)
    sets = [make_power_set([f"w{i}" for i in range(1, k + 1)]) for k in range(1, 6)]
    for i in range(120):
        s = sets[i % len(sets)]
        values, f = _random_point_family(rng, s)
        pf = boolean_point_function(f)
        assert dict(pf.values) == values
        x = preimage_observable(pf, s)
        assert x == reconstruct(f)
        # independent oracle: the preimage of each value
        oracle = sorted(
            (t, s.index_of_value(frozenset(w for w in values if values[w] == t))) for t in set(values.values())
        )
        assert list(x.atoms) == oracle
        assert is_boolean_sigma_hom(x)
    for s in sets:
        for _ in range(10):
            assert is_boolean_sigma_hom(random_observable(rng, s))


@criterion(5, "sharp families give sharp, meet-preserving observables")
def test_c05_sharp():
    rng = random.Random(5)
    structures = [make_mo(2), make_mo(3), make_power_set(["w1", "w2", "w3"]), make_chain(1)]
    for i in range(80):
        s = structures[i % len(structures)]
        f = spectral_family(random_observable(rng, s))
        x = reconstruct(f)
        assert is_sharp(x)
        assert preserves_finite_intersections(x)


def _homomorphisms():
    c2, c3 = make_chain(2), make_chain(3)
    p23, p33 = product(c2, c3), product(c3, c3)
    fz = make_fuzzy(["u", "v"], [(Fraction(1, 2), Fraction(1, 3))])[1]
    fu = make_fuzzy(["u"], [(Fraction(1, 2),)])[1]
    ps3 = make_power_set(["w1", "w2", "w3"])
    ps2 = make_power_set(["w1", "w2"])
    homs = [projection(p23, 0), projection(p23, 1), projection(p33, 0), projection(p33, 1)]
    homs += [restriction(fz, fu), restriction(ps3, ps2), identity(make_chain(5))]
    return homs


@criterion(6, "Jauch-Piron on MV structures and kernel witnesses under RDP")
def test_c06_jauch_piron():
    rng = random.Random(6)
    mv = [s for s in ZOO.values() if "mv" in s.flavor]
    for s in mv:
        for _ in range(12):
            assert jauch_piron_check(random_observable(rng, s))
    checked = 0
    for h in _homomorphisms():
        s = h.source
        assert "rdp" in s.flavor
        kernel = [a for a in range(s.n) if h(a) == h.target.zero]
        for a, b in itertools.product(kernel, repeat=2):
            c = jauch_piron_witness(h, a, b)
            assert s.le(a, c) and s.le(b, c) and h(c) == h.target.zero
            checked += 1
    assert checked > 20


def _quadruples(s):
    for a1, a2 in itertools.product(range(s.n), repeat=2):
        total = s.add(a1, a2)
        if total is None:
            continue
        for b1 in range(s.n):
            if s.leq[b1, total]:
                yield a1, a2, b1, s.sub(total, b1)


@criterion(7, "Riesz refinement exhaustively; MO2 has a counterexample")
def test_c07_rdp():
    structures = [make_chain(n) for n in range(1, 7)] + [product(make_chain(3), make_chain(3))]
    for s in structures:
        for a1, a2, b1, b2 in _quadruples(s):
            m = rdp_refine(s, a1, a2, b1, b2)
            assert s.add(m.c11, m.c12) == a1
            assert s.add(m.c21, m.c22) == a2
            assert s.add(m.c11, m.c21) == b1
            assert s.add(m.c12, m.c22) == b2
    mo2 = make_mo(2)
    failures = 0
    for q in _quadruples(mo2):
        try:
            rdp_refine(mo2, *q)
        except NoRefinement:
            failures += 1
    assert failures >= 1


def _sympy_states(s):
    """Solve the additivity system with sympy; return (solution, free symbols)."""
    xs = sympy.symbols(f"s0:{s.n}")
    eqs = [xs[s.one] - 1]
    for a, b in zip(*np.nonzero(s.plus >= 0)):
        eqs.append(xs[a] + xs[b] - xs[int(s.plus[a, b])])
    sol = sympy.solve(eqs, xs, dict=True)
    return sol, xs


@criterion(8, "state polytopes: chains, power sets, RDP non-emptiness")
def test_c08_states():
    for n in range(1, 9):
        s = make_chain(n)
        poly = state_polytope(s)
        assert len(poly.vertices) == 1 and poly.unique is not None
        sol, xs = _sympy_states(s)
        assert len(sol) == 1
        oracle = tuple(Fraction(str(sol[0][v])) for v in xs)
        assert poly.unique.values == oracle
        assert oracle == tuple(s.values)
    for k in range(1, 5):
        s = make_power_set([f"w{i}" for i in range(1, k + 1)])
        got = {st.values for st in state_polytope(s).vertices}
        masses = {tuple(Fraction(int(w in v)) for v in s.values) for w in s.labels}
        assert got == masses
    for name, s in ZOO.items():
        if "rdp" in s.flavor:
            assert not state_polytope(s).is_empty, name


@criterion(9, "expectation and moments of the worked example")
def test_c09_expectation():
    s = make_chain(5)
    x = make_observable(s, [(1, "1/5"), (2, "4/5")])
    st = state_polytope(s).unique
    assert expectation(st, x) == Fraction(9, 5)
    assert moment(st, x, 2) == Fraction(17, 5)
    rng = random.Random(9)
    for _ in range(60):
        s = make_chain(rng.randint(1, 8))
        st = state_polytope(s).unique
        x = random_observable(rng, s)
        f = {t: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for t in x.points}
        fx = functional_calculus(x, f)
        assert expectation(st, fx) == expectation(st, x, f)
        assert expectation(st, x, f) == sum(f[t] * st.values[a] for t, a in x.atoms)


@criterion(10, "operator families: POVM residuals, fuzzy values, diagonal embedding")
def test_c10_hilbert():
    gen = np.random.default_rng(10)
    for i in range(120):
        dim = 2 + i % 3
        k = int(gen.integers(1, 5))
        atoms = random_povm_atoms(gen, dim, k)
        cums = list(itertools.accumulate(atoms))
        cums[-1] = np.eye(dim)
        pts = sorted(gen.choice(np.arange(-20, 20), size=k, replace=False) / 4)
        f = hilbert.operator_family(list(zip(pts, cums)))
        p = hilbert.reconstruct_povm(f)
        assert p.sum_residual <= 1e-9
        assert all(e.min_eig >= -1e-9 for _, e in p.atoms)
        for _ in range(20):
            phi = random_unit(gen, dim)
            jumps = hilbert.distribution_function(f, phi).jumps
            expect = [hilbert.fuzzy_value(e, phi) for _, e in p.atoms]
            assert np.allclose(jumps, expect, atol=1e-9, rtol=0)
    rng = random.Random(10)
    c3 = make_chain(3)
    cases = [(make_chain(n), None) for n in range(1, 7)] + [(product(make_chain(2), c3), (Fraction(1, 3), Fraction(2, 3)))]
    for s, weights in cases:
        for _ in range(10):
            x = random_observable(rng, s)
            if weights is None:
                st = state_polytope(s).unique
                rho = np.eye(2) / 2
                p = hilbert.diagonal_embedding(x, dim=2)
            else:
                st = validate_state(s, [weights[0] * v[0] + weights[1] * v[1] for v in s.values])
                rho = np.diag([float(w) for w in weights])
                p = hilbert.diagonal_embedding(x)
            stats = hilbert.povm_statistics(p, hilbert.density(rho))
            exact = {float(t): float(q) for t, q in distribution(st, x)}
            for t, q in stats.probabilities:
                assert abs(q - exact.get(t, 0.0)) <= 1e-12


@criterion(11, "CLI golden outputs, repeat runs, JSON/text facts")
def test_c11_cli(monkeypatch):
    monkeypatch.chdir(ROOT)
    for name, argv in CASES:
        code1, out1 = run(argv)
        code2, out2 = run(argv)
        assert (code1, out1) == (code2, out2)
        golden = (ROOT / "tests" / "golden" / f"{name}.txt").read_text(encoding="utf-8")
        assert f"exit {code1}\n{out1}" == golden, name
        jcode, jout = run(["--json", *argv])
        assert jcode == code1
        assert facts_in_text(jout, out1), name
