"""Exact finitely supported probabilities, invariance and recurrence."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import kernels
from .dynamics import (DEFAULT_STEP_LIMIT, DEFAULT_VALUE_LIMIT, CollatzMap, Cycle,
                       CycleRegistry, find_cycles)
from .topology import Carrier, Topology, as_carrier, doubling_zone


class InvariantMeasureOffCycles(ValueError):
    """Measure charges a point that lies on no registry cycle."""


class NotInvariantError(ValueError):
    pass


class RationalMeasure:
    """Probability with finitely many atoms and exact rational weights."""

    __slots__ = ("carrier", "weights")

    def __init__(self, carrier, weights: Mapping[int, object]):
        self.carrier = as_carrier(carrier)
        w = {}
        for x, p in weights.items():
            p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative weight {p} at {x}")
            if p == 0:
                continue
            if x not in self.carrier:
                raise ValueError(f"support point {x} is outside the carrier")
            w[int(x)] = p
        total = sum(w.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self.weights = dict(sorted(w.items()))

    def __getitem__(self, x: int) -> Fraction:
        return self.weights.get(x, Fraction(0))

    def __eq__(self, other):
        return (isinstance(other, RationalMeasure) and self.carrier == other.carrier
                and self.weights == other.weights)

    def __repr__(self):
        inner = ", ".join(f"{x}: {p}" for x, p in self.weights.items())
        return f"RationalMeasure(N={self.carrier.bound}, {{{inner}}})"

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.weights)

    def mass(self, s: Iterable[int]) -> Fraction:
        return sum((self[x] for x in set(s)), Fraction(0))

    def to_dict(self) -> dict:
        return {"carrier": self.carrier.bound,
                "weights": {str(x): str(p) for x, p in self.weights.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> RationalMeasure:
        return cls(int(d["carrier"]), {int(x): Fraction(p) for x, p in d["weights"].items()})


def point_mass(carrier, x: int) -> RationalMeasure:
    return RationalMeasure(carrier, {x: 1})


def convex_combination(terms: Sequence[tuple[object, RationalMeasure]]) -> RationalMeasure:
    """sum of w_i * mu_i; the weights must be nonnegative and sum to 1."""
    if not terms:
        raise ValueError("empty combination")
    carrier = terms[0][1].carrier
    out: dict[int, Fraction] = {}
    for w, mu in terms:
        w = Fraction(w)
        if mu.carrier != carrier:
            raise ValueError("carrier mismatch")
        for x, p in mu.weights.items():
            out[x] = out.get(x, Fraction(0)) + w * p
    return RationalMeasure(carrier, out)


@dataclass(frozen=True)
class OrbitMeasure:
    """Uniform probability on a periodic orbit."""

    cycle: Cycle
    measure: RationalMeasure


def orbit_measure(cycle: Cycle, carrier=None) -> OrbitMeasure:
    if carrier is None:
        carrier = Carrier(max(4, max(cycle.elements)))
    carrier = as_carrier(carrier)
    if max(cycle.elements) > carrier.bound:
        raise ValueError(f"cycle {cycle.elements} exceeds carrier bound {carrier.bound}")
    w = Fraction(1, cycle.length)
    return OrbitMeasure(cycle, RationalMeasure(carrier, {x: w for x in cycle.elements}))


@dataclass(frozen=True)
class InvarianceVerdict:
    invariant: bool
    witness: Optional[int] = None


def is_invariant(measure: RationalMeasure, fmap) -> InvarianceVerdict:
    """mu(f^-1{y}) == mu{y} for every y; enough on a finite power-set σ-algebra."""
    pushed: dict[int, Fraction] = {}
    for x, p in measure.weights.items():
        y = fmap(x)
        if y not in measure.carrier:
            raise ValueError(f"support point {x} maps to {y}, outside the carrier")
        pushed[y] = pushed.get(y, Fraction(0)) + p
    for y in sorted(set(pushed) | set(measure.weights)):
        if pushed.get(y, Fraction(0)) != measure[y]:
            return InvarianceVerdict(False, y)
    return InvarianceVerdict(True)


@dataclass
class RecurrenceReport:
    recurrent: frozenset[int]
    periodic: frozenset[int]
    skipped: frozenset[int]
    scanned: int

    @property
    def consistent(self) -> bool:
        return self.recurrent == self.periodic


def recurrence_scan(fmap: CollatzMap, topology: Topology, scan_bound: int,
                    step_limit: int = DEFAULT_STEP_LIMIT,
                    value_limit: int = DEFAULT_VALUE_LIMIT, *,
                    registry: Optional[CycleRegistry] = None,
                    compiled: Optional[bool] = None) -> RecurrenceReport:
    """Classify seeds 1..scan_bound as recurrent and/or periodic.

    x is recurrent iff some f^k(x), k >= 1, lands in U(x): the minimal
    neighborhood sits inside every open set around x. Seeds outside the
    doubling zone (U(x) is a truncation artifact) and escaped seeds are
    skipped.
    """
    N = topology.carrier.bound
    scan_bound = min(scan_bound, N)
    if registry is None or registry.tail_len is None or registry.scan_bound < scan_bound:
        registry = find_cycles(fmap, scan_bound, step_limit, value_limit, compiled=compiled)
    zone = doubling_zone(topology.carrier)
    tail_len = registry.tail_len
    cyc_idx = registry.cycle_index
    cyc_len = [c.length for c in registry.cycles]

    seeds, steps, nbs, skipped = [], [], [], []
    for x in range(1, scan_bound + 1):
        k = int(cyc_idx[x])
        if k < 0 or not zone(x) or topology.is_full(x):
            skipped.append(x)
            continue
        seeds.append(x)
        # tail then one full lap covers the whole forward orbit
        steps.append(int(tail_len[x]) + cyc_len[k])
        nbs.append(topology.min_nbhd(x))
    flags = kernels.recurrence_flags(fmap.a, fmap.b, seeds, steps, nbs,
                                     registry.value_limit, compiled=compiled)
    seeds_arr = np.asarray(seeds, dtype=object)
    recurrent = frozenset(int(s) for s in seeds_arr[flags]) if seeds else frozenset()
    periodic = frozenset(s for s in seeds if tail_len[s] == 0)
    return RecurrenceReport(recurrent, periodic, frozenset(skipped), scan_bound)


def ergodic_decomposition(measure: RationalMeasure,
                          registry: CycleRegistry) -> list[tuple[Cycle, Fraction]]:
    """Write an invariant measure as a convex combination of orbit measures.

    The weight of cycle C is mu(C). Raises InvariantMeasureOffCycles when the
    support meets no registry cycle at some point, and NotInvariantError when
    the recombination does not reproduce the input.
    """
    owner = {}
    for c in registry.cycles:
        for x in c.elements:
            owner[x] = c
    weights: dict[Cycle, Fraction] = {}
    for x, p in measure.weights.items():
        c = owner.get(x)
        if c is None:
            raise InvariantMeasureOffCycles(
                f"support point {x} lies on no registry cycle "
                "(undiscovered cycle or non-invariant measure)")
        weights[c] = weights.get(c, Fraction(0)) + p
    parts = sorted(weights.items(), key=lambda cw: cw[0].minimum)
    rebuilt = convex_combination(
        [(w, orbit_measure(c, measure.carrier).measure) for c, w in parts])
    if rebuilt != measure:
        raise NotInvariantError("measure is not uniform on its cycles, so not invariant")
    return parts


def decomposition_to_json(parts: Sequence[tuple[Cycle, Fraction]]) -> str:
    return json.dumps([{"cycle_min": str(c.minimum), "weight": str(w)} for c, w in parts])


def integrate(potential, measure: RationalMeasure) -> Fraction:
    """sum over the support of weight(x) * potential(x)."""
    total = Fraction(0)
    for x, p in measure.weights.items():
        v = potential(x)
        if v is None:
            raise ValueError(f"potential undefined at support point {x}")
        total += p * Fraction(v)
    return total
