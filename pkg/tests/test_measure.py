import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from collatz_ergodic import measure as Mz
from collatz_ergodic import topology as T
from collatz_ergodic.dynamics import CollatzMap, Cycle, find_cycles
from collatz_ergodic.measure import (InvariantMeasureOffCycles, NotInvariantError,
                                     RationalMeasure)

import oracles

M31 = CollatzMap(3, 1)
M51 = CollatzMap(5, 1)


def test_measure_validation():
    RationalMeasure(8, {1: Fraction(1, 3), 4: Fraction(2, 3)})
    with pytest.raises(ValueError):
        RationalMeasure(8, {1: Fraction(1, 2)})
    with pytest.raises(ValueError):
        RationalMeasure(8, {1: 2, 2: -1})
    with pytest.raises(ValueError):
        RationalMeasure(8, {9: 1})


def test_json_uses_fraction_strings():
    mu = Mz.orbit_measure(Cycle((1, 4, 2)), 8).measure
    d = json.loads(mu.to_json())
    assert d["weights"] == {"1": "1/3", "2": "1/3", "4": "1/3"}
    assert RationalMeasure.from_dict(d) == mu


def test_orbit_measure_invariant():
    om = Mz.orbit_measure(Cycle((1, 4, 2)))
    assert om.measure.carrier.bound == 4
    assert Mz.is_invariant(om.measure, M31).invariant


def test_point_mass_not_invariant():
    v = Mz.is_invariant(Mz.point_mass(8, 1), M31)
    assert not v.invariant and v.witness is not None
    two = RationalMeasure(8, {1: Fraction(1, 2), 2: Fraction(1, 2)})
    assert Mz.is_invariant(two, CollatzMap(1, 1)).invariant


def test_mass_and_support():
    mu = Mz.convex_combination([(Fraction(1, 4), Mz.point_mass(8, 1)),
                                (Fraction(3, 4), Mz.point_mass(8, 5))])
    assert mu.support == {1, 5}
    assert mu.mass({1, 2, 3}) == Fraction(1, 4)


class TestDecomposition:
    reg = find_cycles(M51, 30)
    carrier = max(max(c.elements) for c in reg.cycles)

    def _measures(self):
        return [Mz.orbit_measure(c, self.carrier).measure for c in self.reg.cycles]

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=100, deadline=None)
    def test_roundtrip(self, rng):
        ws = oracles.random_convex_weights(rng, len(self.reg.cycles))
        mu = Mz.convex_combination(list(zip(ws, self._measures())))
        assert Mz.is_invariant(mu, M51).invariant
        parts = Mz.ergodic_decomposition(mu, self.reg)
        assert [w for _, w in parts] == [w for w in ws if w]
        assert Mz.convex_combination([(w, Mz.orbit_measure(c, self.carrier).measure)
                                      for c, w in parts]) == mu

    def test_off_cycle_support(self):
        mu = RationalMeasure(self.carrier, {5: 1})
        with pytest.raises(InvariantMeasureOffCycles):
            Mz.ergodic_decomposition(mu, self.reg)

    def test_nonuniform_on_cycle(self):
        mu = RationalMeasure(self.carrier, {1: Fraction(1, 2), 6: Fraction(1, 2)})
        with pytest.raises(NotInvariantError):
            Mz.ergodic_decomposition(mu, self.reg)

    def test_json(self):
        mu = self._measures()[1]
        out = json.loads(Mz.decomposition_to_json(Mz.ergodic_decomposition(mu, self.reg)))
        assert out == [{"cycle_min": "13", "weight": "1"}]


def test_integrate_affine():
    rng = random.Random(2)
    reg = find_cycles(M51, 30)
    N = max(max(c.elements) for c in reg.cycles)
    phi = {x: Fraction(rng.randint(-9, 9)) for x in range(1, N + 1)}
    ms = [Mz.orbit_measure(c, N).measure for c in reg.cycles]
    for _ in range(50):
        ws = oracles.random_convex_weights(rng, len(ms))
        mu = Mz.convex_combination(list(zip(ws, ms)))
        lhs = Mz.integrate(phi.__getitem__, mu)
        rhs = sum(w * Mz.integrate(phi.__getitem__, m) for w, m in zip(ws, ms))
        assert lhs == rhs


class TestRecurrence:
    def test_small_standard(self):
        rep = Mz.recurrence_scan(M31, T.collatz_topology(256), 128)
        assert rep.recurrent == rep.periodic == {1, 2, 4}
        assert rep.consistent

    def test_five_one(self):
        rep = Mz.recurrence_scan(M51, T.collatz_topology(60), 30, value_limit=10 ** 6)
        assert rep.recurrent == rep.periodic
        assert rep.periodic == {1, 2, 3, 4, 6, 8, 13, 16, 17, 26, 27}

    def test_escaped_seeds_skipped(self):
        rep = Mz.recurrence_scan(M51, T.collatz_topology(60), 30, value_limit=10 ** 6)
        assert 7 in rep.skipped

    def test_matches_direct_definition(self):
        N, S = 200, 100
        t = T.collatz_topology(N)
        rep = Mz.recurrence_scan(M31, t, S)
        for x in range(1, S + 1):
            if x in rep.skipped:
                continue
            u = t.min_nbhd(x)
            seq = oracles.iterate_orbit(3, 1, x)
            visited = seq[0][1:] + seq[1] + ([x] if not seq[0] else [])
            assert (x in rep.recurrent) == any(y in u for y in visited)

    def test_uncompiled_agrees(self):
        t = T.collatz_topology(512)
        a = Mz.recurrence_scan(M31, t, 256, compiled=True)
        b = Mz.recurrence_scan(M31, t, 256, compiled=False)
        assert (a.recurrent, a.periodic, a.skipped) == (b.recurrent, b.periodic, b.skipped)
