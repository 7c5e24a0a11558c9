import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from collatz_ergodic import measurable as S
from collatz_ergodic import topology as T
from collatz_ergodic.dynamics import CollatzMap
from collatz_ergodic.measurable import AtomPartition
from collatz_ergodic.topology import Carrier

import oracles

M31 = CollatzMap(3, 1)


def _random_topology(rng, N):
    return T.generate(T.SubbasisFamily(Carrier(N), tuple(oracles.random_subbasis(rng, N))))


def test_partition_validation():
    AtomPartition(4, [[1, 2], [3], [4]])
    with pytest.raises(ValueError):
        AtomPartition(4, [[1, 2], [2, 3], [4]])
    with pytest.raises(ValueError):
        AtomPartition(4, [[1, 2], [3]])
    with pytest.raises(ValueError):
        AtomPartition(4, [[1, 2], [3, 4, 5]])


def test_partition_json():
    p = S.borel(T.collatz_topology(8))
    d = json.loads(p.to_json())
    assert d["atoms"] == sorted(d["atoms"], key=min)
    assert AtomPartition.from_dict(d) == p


def test_borel_atoms_n8():
    p = S.borel(T.collatz_topology(8))
    assert [sorted(a) for a in p.atoms] == [[1], [2], [3, 6], [4], [5, 7], [8]]


@pytest.mark.parametrize("N", [16, 64, 256])
def test_safe_singletons_measurable(N):
    p = S.borel(T.collatz_topology(N))
    zone = T.borel_zone(Carrier(N))
    for x in zone.points():
        assert p.block_of(x) == {x}


def test_three_becomes_measurable_at_12():
    assert {3} not in S.borel(T.collatz_topology(8)).atoms
    assert {3} in S.borel(T.collatz_topology(12)).atoms


@given(st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_borel_matches_oracle(rng):
    N = rng.randint(4, 10)
    t = _random_topology(rng, N)
    got = {oracles.mask(a) for a in S.borel(t).atoms}
    assert got == oracles.sigma_atoms(N, t.open_masks())


@given(st.randoms(use_true_random=False))
@settings(max_examples=80, deadline=None)
def test_intersection_matches_oracle(rng):
    N = rng.randint(4, 10)
    parts = [S.borel(_random_topology(rng, N)) for _ in range(rng.randint(1, 4))]
    meet = S.intersect_sigma(parts)
    common = set.intersection(*(oracles.sigma_family({oracles.mask(a) for a in p.atoms})
                                for p in parts))
    assert {oracles.mask(a) for a in meet.atoms} == oracles.atoms_of_family(N, common)
    for p in parts:
        assert p.is_finer_or_equal(meet)


def test_measurable_on_safe_zone():
    N = 64
    p = S.borel(T.collatz_topology(N))
    v = S.check_measurable(M31, p, p, T.borel_zone(Carrier(N)))
    assert v.measurable and v.skipped


def test_non_measurable_detected():
    # identity on atoms {1,2}, {3}, {4} is fine; swapping 1 and 3 is not
    p = AtomPartition(4, [[1, 2], [3], [4]])
    f = {1: 3, 2: 2, 3: 1, 4: 4}.__getitem__
    v = S.check_measurable(f, p, p)
    assert not v.measurable and v.witness_block is not None


def test_check_measurable_matches_bruteforce():
    rng = random.Random(11)
    for _ in range(300):
        N = rng.randint(4, 8)
        f = {x: rng.randint(1, N) for x in range(1, N + 1)}
        p1 = S.borel(_random_topology(rng, N))
        p2 = S.borel(_random_topology(rng, N))
        fam1 = oracles.sigma_family({oracles.mask(a) for a in p1.atoms})
        fam2 = oracles.sigma_family({oracles.mask(a) for a in p2.atoms})
        brute = oracles.measurable_brute(f.__getitem__, N, fam1, fam2)
        assert S.check_measurable(f.__getitem__, p1, p2).measurable == brute


def test_transfer_on_collatz_family():
    N = 32
    fam = [T.discrete_topology(N), T.witness_topology(N), T.collatz_topology(N)]
    v = S.measurability_transfer_check(M31, fam, T.borel_zone(Carrier(N)))
    assert v.premise and v.conclusion and v.holds
    assert "finite sample" in v.note


def test_intersection_structures_validate():
    fam = [T.collatz_topology(12), T.witness_topology(12)]
    top, sigma = S.intersection_structures(fam)
    top.validate()
    assert oracles.is_topology(12, top.open_masks())
    assert len(sigma.atoms) >= 1


def test_subbasis_sigma_collapse():
    # every topology containing the subbasis is finer than the generated one,
    # so the intersection of their Borel algebras is the generated one's
    N = 10
    rng = random.Random(3)
    sub = list(T.collatz_subbasis(N))
    fam = [T.collatz_topology(N)]
    for _ in range(6):
        extra = oracles.random_subbasis(rng, N, 2)
        fam.append(T.generate(T.SubbasisFamily(Carrier(N), tuple(sub + extra))))
    meet = S.intersect_sigma([S.borel(t) for t in fam])
    assert meet == S.borel(T.collatz_topology(N))
