import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import structure_zoo
from qobs.errors import (
    AxiomViolation,
    ClosureOverflow,
    MissingComplement,
    NoRefinement,
    NotSummable,
    PreconditionFailed,
    SizeOverflow,
    TooLarge,
)
from qobs.structure import (
    UNDEF,
    Homomorphism,
    QuantumStructure,
    blocks,
    compatibility_witness,
    fuzzy_lift,
    identity,
    is_compatible,
    is_subalgebra,
    jauch_piron_witness,
    make_chain,
    make_fuzzy,
    make_mo,
    make_power_set,
    mv_lift,
    product,
    projection,
    rdp_refine,
    restriction,
    sharp_elements,
    summable_sum,
)

ZOO = structure_zoo()


def table(names, sums):
    """Build a partial-addition table from ``(a, b, c)`` rows plus the
    implied zero rows and mirrors."""
    idx = {x: i for i, x in enumerate(names)}
    n = len(names)
    plus = np.full((n, n), UNDEF, dtype=np.int32)
    for i in range(n):
        plus[idx["0"], i] = plus[i, idx["0"]] = i
    for a, b, c in sums:
        plus[idx[a], idx[b]] = plus[idx[b], idx[a]] = idx[c]
    return QuantumStructure(names, plus, idx["0"], idx["1"])


def flags(s):
    return set(s.flavor)


def test_two_element_table_is_boolean():
    s = table(["0", "1"], [])
    assert {"boolean", "mv", "lattice", "rdp"} <= flags(s)


def test_one_plus_one_violates_axiom_iv():
    with pytest.raises(AxiomViolation) as info:
        table(["0", "1"], [("1", "1", "1")])
    assert info.value.code == "axiom-iv"


def test_other_axiom_failures():
    with pytest.raises(MissingComplement):
        table(["0", "a", "1"], [])
    # (a+a)+c = c+c = 1 but a+c is undefined
    names = ["0", "a", "b", "c", "1"]
    with pytest.raises(AxiomViolation) as info:
        table(names, [("a", "b", "1"), ("c", "c", "1"), ("a", "a", "c")])
    assert info.value.code == "axiom-ii"


def test_chain_examples():
    c5 = make_chain(5)
    assert c5.names == ("0", "1/5", "2/5", "3/5", "4/5", "1")
    assert {"mv", "lattice", "rdp"} <= flags(c5)
    assert {"boolean", "mv"} <= flags(make_chain(1))
    c2 = make_chain(2)
    half = c2.element("1/2")
    assert c2.oplus_table[half, half] == c2.one


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 10))
def test_chain_matches_truncated_addition(n):
    s = make_chain(n)
    for a, b in itertools.product(range(s.n), repeat=2):
        va, vb = s.values[a], s.values[b]
        got = s.add(a, b)
        assert (got is None) == (va + vb > 1)
        if got is not None:
            assert s.values[got] == va + vb
        assert s.values[s.oplus_table[a, b]] == min(va + vb, 1)


def test_power_set_examples():
    assert make_power_set(["w1"]).n == 2
    s = make_power_set(["w1", "w2"])
    assert s.n == 4
    a, b = s.element("{w1}"), s.element("{w2}")
    assert s.values[s.add(a, b)] == frozenset({"w1", "w2"}) and s.add(a, b) == s.one
    s3 = make_power_set(["w1", "w2", "w3"])
    atoms = [a for a in range(s3.n) if a != s3.zero and all(not s3.leq[c, a] or c in (a, s3.zero) for c in range(s3.n))]
    assert s3.n == 8 and len(atoms) == 3
    assert {"boolean", "mv", "lattice", "rdp"} <= flags(s3)
    with pytest.raises(TooLarge):
        make_power_set([f"w{i}" for i in range(13)])


def test_product_examples():
    b = product(make_chain(1), make_chain(1))
    assert b.n == 4 and "boolean" in flags(b)
    c55 = product(make_chain(5), make_chain(5))
    assert c55.n == 36 and "mv" in flags(c55)
    m = product(make_mo(2), make_chain(1))
    assert "lattice" in flags(m) and "mv" not in flags(m)
    with pytest.raises(SizeOverflow):
        product(make_power_set([f"w{i}" for i in range(7)]), make_power_set([f"v{i}" for i in range(7)]))


def test_fuzzy_examples():
    _, s = make_fuzzy(["w"], [(1,)])
    assert s.n == 2
    _, s = make_fuzzy(["w1", "w2"], [(1, 0), (0, 1)])
    assert sorted(s.values) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert "boolean" in flags(s)
    # 2/5 + 2/5 is admissible, so the closure is the whole fifths chain
    _, s = make_fuzzy(["w"], [(1,), (Fraction(2, 5),)])
    assert sorted(v[0] for v in s.values) == [Fraction(k, 5) for k in range(6)]
    with pytest.raises(ClosureOverflow):
        make_fuzzy(["u", "v"], [(Fraction(1, 29), Fraction(1, 31))], max_size=100)


def _compatible_oracle(s, a, b):
    """Brute force: a = a1 + c, b = b1 + c with a1 + b1 + c defined."""
    for c in range(s.n):
        a1, b1 = s.sub(a, c), s.sub(b, c)
        if a1 is None or b1 is None:
            continue
        ab = s.add(a1, b1)
        if ab is not None and s.add(ab, c) is not None:
            return True
    return False


def test_compatibility_examples():
    c5 = make_chain(5)
    assert all(is_compatible(c5, a, b) for a in range(6) for b in range(6))
    a, b = c5.element("1/5"), c5.element("3/5")
    assert compatibility_witness(c5, a, b) == (c5.zero, c5.sub(b, a), a)
    mo = make_mo(2)
    assert not is_compatible(mo, mo.element("a"), mo.element("b"))


@pytest.mark.parametrize("name", sorted(ZOO))
def test_blocks_match_clique_oracle(name):
    s = ZOO[name]
    g = nx.Graph()
    g.add_nodes_from(range(s.n))
    for a, b in itertools.combinations(range(s.n), 2):
        assert is_compatible(s, a, b) == _compatible_oracle(s, a, b)
        if _compatible_oracle(s, a, b):
            g.add_edge(a, b)
    expect = {frozenset(c) for c in nx.find_cliques(g)}
    assert set(blocks(s)) == expect
    if "mv" in s.flavor:
        assert blocks(s) == [frozenset(range(s.n))]


def test_block_examples():
    mo = make_mo(2)
    named = {frozenset(mo.names[a] for a in b) for b in blocks(mo)}
    assert named == {frozenset({"0", "a", "a'", "1"}), frozenset({"0", "b", "b'", "1"})}
    assert blocks(make_chain(1)) == [frozenset({0, 1})]


@pytest.mark.parametrize("name", sorted(ZOO))
def test_sharp_elements_match_oracle(name):
    s = ZOO[name]
    expect = set()
    for a in range(s.n):
        c = s.comp(a)
        lower = [d for d in range(s.n) if s.leq[d, a] and s.leq[d, c]]
        if lower == [s.zero]:
            expect.add(a)
    assert set(sharp_elements(s)) == expect


def test_sharp_examples():
    c5 = make_chain(5)
    assert sharp_elements(c5) == {c5.zero, c5.one}
    assert len(sharp_elements(make_power_set(["w1", "w2"]))) == 4
    assert len(sharp_elements(make_mo(2))) == 6


def test_refine_examples():
    c5 = make_chain(5)
    e = c5.element
    m = rdp_refine(c5, e("2/5"), e("1/5"), e("3/5"), e("0"))
    assert [c5.names[c] for c in m.as_tuple()] == ["2/5", "0", "1/5", "0"]
    for s in (c5, make_mo(2)):
        for a in range(s.n):
            assert rdp_refine(s, a, s.zero, a, s.zero).as_tuple() == (a, s.zero, s.zero, s.zero)
    mo = make_mo(2)
    with pytest.raises(NoRefinement):
        rdp_refine(mo, mo.element("a"), mo.element("a'"), mo.element("b"), mo.element("b'"))


def test_no_homomorphism_from_chain5_to_two():
    c5, two = make_chain(5), make_chain(1)
    found = []
    for mapping in itertools.product(range(2), repeat=c5.n):
        try:
            found.append(Homomorphism(c5, two, mapping))
        except PreconditionFailed:
            pass
    assert found == []
    h = identity(c5)
    assert jauch_piron_witness(h, c5.zero, c5.zero) == c5.zero


def test_jauch_piron_witness_examples():
    s, t = make_power_set(["w1", "w2"]), make_power_set(["w1"])
    h = restriction(s, t)
    w2 = s.element("{w2}")
    assert jauch_piron_witness(h, w2, w2) == w2
    c = jauch_piron_witness(h, s.zero, w2)
    assert s.le(w2, c) and h(c) == t.zero
    with pytest.raises(PreconditionFailed):
        jauch_piron_witness(h, s.element("{w1}"), w2)


def test_mv_lift_examples():
    c5 = make_chain(5)
    for A, B in itertools.combinations_with_replacement(range(6), 2):
        for c in range(A, B + 1):
            assert mv_lift(identity(c5), A, B, c) == c
    p = product(c5, c5)
    h = projection(p, 0)
    A = p.index_of_value((Fraction(0), Fraction(0)))
    B = p.index_of_value((Fraction(1), Fraction(3, 5)))
    C = mv_lift(h, A, B, c5.element("2/5"))
    x, y = p.values[C]
    assert x == Fraction(2, 5) and y <= Fraction(3, 5)
    s, t = make_power_set(["w1", "w2"]), make_power_set(["w1"])
    h = restriction(s, t)
    C = mv_lift(h, s.zero, s.one, t.one)
    assert "w1" in s.values[C]


def test_fuzzy_lift_lands_between():
    _, s = make_fuzzy(["u", "v"], [(Fraction(1, 2), Fraction(1, 3))])
    _, t = make_fuzzy(["u"], [(Fraction(1, 2),)])
    h = restriction(s, t)
    for f, g in itertools.product(range(s.n), repeat=2):
        if not s.le(f, g):
            continue
        for c in range(t.n):
            if t.le(h(f), c) and t.le(c, h(g)):
                out = fuzzy_lift(h, f, g, c)
                assert s.le(f, out) and s.le(out, g) and h(out) == c


def test_summable_sum_examples():
    c5 = make_chain(5)
    e = c5.element
    assert summable_sum(c5, [e("2/5")]) == e("2/5")
    assert summable_sum(c5, [e("1/5")] * 3) == e("3/5")
    with pytest.raises(NotSummable):
        summable_sum(c5, [e("4/5"), e("4/5")])


def test_subalgebra():
    c5 = make_chain(5)
    assert is_subalgebra(c5, range(6))
    assert is_subalgebra(c5, {c5.zero, c5.one})
    assert not is_subalgebra(c5, {c5.zero, c5.element("1/5"), c5.element("4/5"), c5.one})


@pytest.mark.parametrize("name", sorted(ZOO))
def test_effect_algebra_axioms_hold(name):
    s = ZOO[name]
    p = s.plus
    assert (p == p.T).all()
    for a, b, c in itertools.product(range(s.n), repeat=3):
        ab = s.add(a, b)
        bc = s.add(b, c)
        left = s.add(ab, c) if ab is not None else None
        right = s.add(a, bc) if bc is not None else None
        assert left == right
    for a in range(s.n):
        assert [b for b in range(s.n) if s.add(a, b) == s.one] == [s.comp(a)]
        assert (s.add(a, s.one) is not None) == (a == s.zero)
    le = s.leq
    assert le.diagonal().all()
    assert not (le & le.T & ~np.eye(s.n, dtype=bool)).any()
    assert (le[s.zero]).all() and (le[:, s.one]).all()


@pytest.mark.parametrize("name", [n for n in sorted(ZOO) if "mv" in ZOO[n].flavor])
def test_mv_induced_addition(name):
    s = ZOO[name]
    o = s.oplus_table
    for a, b in itertools.product(range(s.n), repeat=2):
        defined = s.le(a, s.comp(b))
        assert (s.add(a, b) is not None) == defined
        if defined:
            assert s.add(a, b) == o[a, b]
