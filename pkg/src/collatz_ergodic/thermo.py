"""Potentials, pressure and equilibrium states over a cycle registry.

Every invariant probability here is a convex combination of orbit measures,
and each of those has zero entropy, so the pressure of a potential is the
largest orbit average over the registry. All results are relative to the
registry they were computed from.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .dynamics import (DEFAULT_STEP_LIMIT, DEFAULT_VALUE_LIMIT, Cycle, CycleRegistry,
                       orbit)
from .measure import integrate, orbit_measure
from .topology import Carrier, Topology, as_carrier, doubling_zone

# entropy of any invariant probability supported on finitely many periodic orbits
ENTROPY = Fraction(0)


class EmptyRegistryError(ValueError):
    """No cycles known, so no invariant probabilities to take a supremum over."""


class Kind(enum.Enum):
    TABLE = "table"
    KEY = "key"
    INDICATOR = "indicator"
    CONSTANT = "constant"


class Potential:
    """Exact-valued function on the carrier, evaluated lazily and cached."""

    def __init__(self, carrier, fn: Callable[[int], object], kind: Kind, label: str,
                 meta: Optional[dict] = None):
        self.carrier = as_carrier(carrier)
        self._fn = fn
        self._cache: dict[int, Fraction] = {}
        self.kind = kind
        self.label = label
        self.meta = meta if meta is not None else {}
        self.certificate = None

    def __call__(self, x: int) -> Fraction:
        v = self._cache.get(x)
        if v is None:
            if x not in self.carrier:
                raise ValueError(f"potential {self.label} is not defined at {x}")
            v = self._cache[x] = Fraction(self._fn(x))
        return v

    def __add__(self, c) -> Potential:
        c = Fraction(c)
        return Potential(self.carrier, lambda x: self(x) + c, Kind.TABLE,
                         f"{self.label}+{c}")

    def values(self) -> dict[int, Fraction]:
        return {x: self(x) for x in self.carrier}

    def __repr__(self):
        return f"Potential({self.label!r}, kind={self.kind.value}, N={self.carrier.bound})"


def table_potential(carrier, values: Mapping[int, object], label: str = "table") -> Potential:
    carrier = as_carrier(carrier)
    missing = [x for x in carrier if x not in values]
    if missing:
        raise ValueError(f"table potential must be total; missing {missing[:5]}")
    table = {x: Fraction(values[x]) for x in carrier}
    return Potential(carrier, table.__getitem__, Kind.TABLE, label)


def constant_potential(carrier, c, label: Optional[str] = None) -> Potential:
    c = Fraction(c)
    return Potential(carrier, lambda x: c, Kind.CONSTANT, label or f"const:{c}")


def indicator_potential(orbit_union: Iterable[int], carrier, label: Optional[str] = None) -> Potential:
    """1 on the given set, 0 elsewhere."""
    carrier = as_carrier(carrier)
    s = frozenset(orbit_union)
    if not all(x in carrier for x in s):
        raise ValueError("indicator set leaves the carrier")
    return Potential(carrier, lambda x: 1 if x in s else 0, Kind.INDICATOR,
                     label or f"indicator:{sorted(s)[:4]}", {"set": s})


def key_potential(fmap, carrier, step_limit: int = DEFAULT_STEP_LIMIT,
                  value_limit: int = DEFAULT_VALUE_LIMIT, *,
                  support: str = "periodic", card_factor: bool = False) -> Potential:
    """Potential that is constant on each cycle with orbit average sum(C).

    Default: n -> sum(C) when n lies on the cycle C, else 0. Every nonzero
    level set is then a union of cycles, which are open.

    ``support="orbit"`` uses the whole finite forward orbit O(n) instead of
    the cycle, and ``card_factor`` multiplies by |O(n)|; together they give
    the literal n -> |O(n)| * sum(O(n)), whose orbit average is |C| * sum(C)
    and which is not continuous. Orbits that escape the limits count as
    infinite (value 0) and are recorded in ``meta["undecided"]``.
    """
    if support not in ("periodic", "orbit"):
        raise ValueError(f"support must be 'periodic' or 'orbit', got {support!r}")
    carrier = as_carrier(carrier)
    undecided: set[int] = set()

    def value(n):
        res = orbit(fmap, n, step_limit, value_limit)
        o = res.orbit_set()
        if o is None:
            undecided.add(n)
            return 0
        if support == "periodic":
            if res.tail:
                return 0
            o = res.cycle.as_set()
        return len(o) * sum(o) if card_factor else sum(o)

    label = "key" if (support, card_factor) == ("periodic", False) else \
        f"key[{support}{',card' if card_factor else ''}]"
    return Potential(carrier, value, Kind.KEY, label,
                     {"undecided": undecided, "map": fmap.label})


def literal_key_potential(fmap, carrier, step_limit: int = DEFAULT_STEP_LIMIT,
                          value_limit: int = DEFAULT_VALUE_LIMIT) -> Potential:
    """n -> |O(n)| * sum(O(n)) over the forward orbit, exactly as written."""
    return key_potential(fmap, carrier, step_limit, value_limit,
                         support="orbit", card_factor=True)


class CodomainMode(enum.Enum):
    GENERATED = "generated"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class ContinuityCertificate:
    mode: CodomainMode
    continuous: bool
    witness_set: Optional[frozenset] = None
    witness_point: Optional[int] = None
    zone: str = "doubling"
    checked: int = 0


def check_potential_continuity(potential: Potential, topology: Topology,
                               mode: CodomainMode = CodomainMode.GENERATED) -> ContinuityCertificate:
    """Preimage of every codomain generator must be open on the safe zone.

    GENERATED: generators are the pairs {v, 2v} (v a positive integer) that
    meet the attained values. DISCRETE: every attained value is a generator.
    Openness is tested in the subspace of doubling-zone points.
    """
    if potential.carrier != topology.carrier:
        raise ValueError("carrier mismatch")
    carrier = topology.carrier
    zone = doubling_zone(carrier)
    safe = frozenset(zone.points())
    vals = potential.values()
    level: dict[Fraction, set[int]] = {}
    for x, v in vals.items():
        level.setdefault(v, set()).add(x)

    gens: set[frozenset] = set()
    for v in level:
        if mode is CodomainMode.DISCRETE:
            gens.add(frozenset((v,)))
        elif v.denominator == 1 and v >= 1:
            gens.add(frozenset((v, 2 * v)))
            if v.numerator % 2 == 0:
                gens.add(frozenset((v / 2, v)))

    for g in sorted(gens, key=lambda s: sorted(s)):
        pre = set()
        for v in g:
            pre |= level.get(v, set())
        for x in sorted(pre & safe):
            if not (topology.min_nbhd(x) & safe) <= pre:
                cert = ContinuityCertificate(mode, False, g, x, zone.name, len(gens))
                potential.certificate = cert
                return cert
    cert = ContinuityCertificate(mode, True, zone=zone.name, checked=len(gens))
    potential.certificate = cert
    return cert


def orbit_average(potential: Potential, cycle: Cycle) -> Fraction:
    """(1/|C|) * sum of the potential over C."""
    return sum((potential(x) for x in cycle.elements), Fraction(0)) / cycle.length


@dataclass(frozen=True)
class PressureResult:
    value: Fraction
    argmax: tuple[Cycle, ...]
    registry_digest: str = ""


def pressure(potential: Potential, registry: CycleRegistry) -> PressureResult:
    """sup over invariant probabilities of entropy + integral.

    Integrals are affine on the simplex spanned by the orbit measures, so the
    supremum is the largest orbit average and is attained exactly on the
    cycles that reach it.
    """
    if not registry.cycles:
        raise EmptyRegistryError("no invariant probabilities discovered")
    avgs = [(ENTROPY + orbit_average(potential, c), c) for c in registry.cycles]
    best = max(a for a, _ in avgs)
    return PressureResult(best, tuple(c for a, c in avgs if a == best), registry.digest())


@dataclass(frozen=True)
class EquilibriumStates:
    """All convex combinations of the orbit measures on the argmax cycles."""

    pressure: Fraction
    generators: tuple[Cycle, ...]
    description: str = "all convex combinations of listed orbit measures"

    @property
    def unique(self) -> bool:
        return len(self.generators) == 1


def equilibrium_states(potential: Potential, registry: CycleRegistry) -> EquilibriumStates:
    res = pressure(potential, registry)
    for c in res.argmax:
        mu = orbit_measure(c, Carrier(max(4, max(c.elements))))
        if integrate(potential, mu.measure) != res.value:
            raise AssertionError(f"generator on {c.elements} misses the pressure")
    return EquilibriumStates(res.value, res.argmax)


def battery(registry: CycleRegistry, carrier=None, step_limit: int = DEFAULT_STEP_LIMIT,
            value_limit: int = DEFAULT_VALUE_LIMIT, *, seed: int = 0,
            n_random: int = 3) -> list[Potential]:
    """Test potentials: key, one indicator per cycle, the union indicator,
    constants, and random bounded tables."""
    carrier = as_carrier(carrier or report_carrier(registry))
    out = [key_potential(registry.fmap, carrier, step_limit, value_limit)]
    union: set[int] = set()
    for c in registry.cycles:
        out.append(indicator_potential(c.elements, carrier, f"indicator:cycle-{c.minimum}"))
        union |= c.as_set()
    out.append(indicator_potential(union, carrier, "indicator:union"))
    out += [constant_potential(carrier, 0), constant_potential(carrier, 5)]
    rng = random.Random(seed)
    for i in range(n_random):
        vals = {x: rng.randint(0, 9) for x in carrier}
        out.append(table_potential(carrier, vals, f"random-table:{seed}:{i}"))
    return out


def report_carrier(registry: CycleRegistry) -> Carrier:
    top = max((max(c.elements) for c in registry.cycles), default=4)
    return Carrier(max(4, top))


def dichotomy_report(registry: CycleRegistry, carrier=None,
                     step_limit: Optional[int] = None, value_limit: Optional[int] = None,
                     *, seed: int = 0, n_random: int = 3) -> dict:
    """Existence and uniqueness of equilibrium states across the battery."""
    step_limit = step_limit or registry.step_limit
    value_limit = value_limit or registry.value_limit
    head = {
        "map": registry.fmap.to_dict(),
        "registry_digest": registry.digest(),
        "relative_to": f"registry {registry.digest()} (seeds <= {registry.scan_bound})",
        "cycles": len(registry.cycles),
    }
    if not registry.cycles:
        head.update(battery=[], verdict="no invariant probabilities discovered; pressure undefined")
        return head

    rows = []
    for phi in battery(registry, carrier, step_limit, value_limit, seed=seed, n_random=n_random):
        eq = equilibrium_states(phi, registry)
        rows.append({
            "potential": phi.label,
            "pressure": str(eq.pressure),
            "argmax": [str(c.minimum) for c in eq.generators],
            "exists": True,
            "unique": eq.unique,
        })
    n = len(registry.cycles)
    union_row = next(r for r in rows if r["potential"] == "indicator:union")
    all_unique = all(r["unique"] for r in rows)
    if n == 1:
        verdict = ("one periodic orbit relative to registry: every battery potential has an "
                   "equilibrium state and it is unique")
    else:
        verdict = (f"{n} periodic orbits relative to registry: every battery potential has an "
                   f"equilibrium state, but the indicator of the union has {len(union_row['argmax'])} "
                   "ergodic equilibrium states, so uniqueness fails")
    head.update(
        battery=rows,
        verdict=verdict,
        checks={
            "union_pressure_is_one": union_row["pressure"] == "1",
            "union_unique_iff_one_cycle": union_row["unique"] == (n == 1),
            "all_unique": all_unique,
        },
        note=("existence for every continuous potential is only shown for this battery; "
              "the converse is exhibited by key_pressure_growth, not quantified"),
    )
    return head


def key_pressure_growth(registry: CycleRegistry, synthetic: Sequence[int],
                        step_limit: Optional[int] = None,
                        value_limit: Optional[int] = None) -> dict:
    """Add a made-up cycle with a larger element sum and compare key pressures.

    On the synthetic points the key potential takes the value sum(S), as if
    they formed a cycle; real points keep their actual values.
    """
    step_limit = step_limit or registry.step_limit
    value_limit = value_limit or registry.value_limit
    fake = Cycle(tuple(synthetic))
    carrier = Carrier(max(report_carrier(registry).bound, max(fake.elements)))
    base = key_potential(registry.fmap, carrier, step_limit, value_limit)
    fake_val = Fraction(fake.total())
    grown = Potential(carrier, lambda x: fake_val if x in fake else base(x), Kind.KEY,
                      "key+synthetic")
    before = pressure(base, registry).value
    after = pressure(grown, registry.with_cycles([fake])).value
    return {"before": before, "after": after, "increased": after > before,
            "synthetic_sum": fake.total()}
