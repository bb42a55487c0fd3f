"""Random objects shared by the test modules."""

import random
from fractions import Fraction

import numpy as np

from qobs.observables import make_observable
from qobs.structure import make_chain, make_fuzzy, make_mo, make_power_set, product


def random_points(rng: random.Random, k: int) -> list:
    pool = {Fraction(rng.randint(-40, 40), rng.choice((1, 2, 3, 4, 6))) for _ in range(4 * k + 8)}
    return rng.sample(sorted(pool), k)


def random_partition(rng: random.Random, s, max_atoms: int = 5) -> list:
    """Split ``1`` into nonzero pieces by repeatedly carving a random
    element out of what remains."""
    rem, pieces = s.one, []
    while rem != s.zero:
        if len(pieces) == max_atoms - 1:
            pieces.append(rem)
            break
        below = [a for a in range(s.n) if a != s.zero and s.leq[a, rem]]
        a = rng.choice(below)
        pieces.append(a)
        rem = s.sub(rem, a)
    return pieces


def random_observable(rng: random.Random, s, max_atoms: int = 5):
    pieces = random_partition(rng, s, max_atoms)
    return make_observable(s, zip(random_points(rng, len(pieces)), pieces))


def structure_zoo() -> dict:
    """The structures the property tests range over."""
    zoo = {f"chain{n}": make_chain(n) for n in range(1, 9)}
    c2, c3 = zoo["chain2"], zoo["chain3"]
    zoo["chain2xchain3"] = product(c2, c3)
    zoo["chain3xchain3"] = product(c3, c3)
    zoo["mo2"] = make_mo(2)
    zoo["mo3"] = make_mo(3)
    zoo["mo2xchain1"] = product(make_mo(2), zoo["chain1"])
    zoo["powerset3"] = make_power_set(["w1", "w2", "w3"])
    zoo["fuzzy_half_third"] = make_fuzzy(["u", "v"], [(Fraction(1, 2), Fraction(1, 3))])[1]
    zoo["fuzzy_quarter"] = make_fuzzy(["u"], [(Fraction(1, 4),)])[1]
    return zoo


def random_povm_atoms(gen: np.random.Generator, dim: int, k: int) -> list:
    """``k`` positive matrices normalized to sum to the identity."""
    raw = []
    for _ in range(k):
        a = gen.normal(size=(dim, dim)) + 1j * gen.normal(size=(dim, dim))
        raw.append(a @ a.conj().T)
    total = sum(raw)
    w, v = np.linalg.eigh(total)
    inv_sqrt = v @ np.diag(w**-0.5) @ v.conj().T
    return [inv_sqrt @ m @ inv_sqrt for m in raw]


def random_unit(gen: np.random.Generator, dim: int) -> np.ndarray:
    v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
    return v / np.linalg.norm(v)
