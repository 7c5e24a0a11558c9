"""σ-algebras on a finite carrier, stored as atom partitions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .topology import (SafeZone, Topology, as_carrier, image_zone,
                       intersect_topologies)


class AtomPartition:
    """Partition of the carrier; the σ-algebra is every union of blocks."""

    __slots__ = ("carrier", "atoms", "_block_of")

    def __init__(self, carrier, atoms: Iterable[Iterable[int]]):
        self.carrier = as_carrier(carrier)
        blocks = sorted((frozenset(a) for a in atoms), key=min)
        block_of = {}
        for i, blk in enumerate(blocks):
            if not blk:
                raise ValueError("atoms must be nonempty")
            for x in blk:
                if x not in self.carrier:
                    raise ValueError(f"{x} is outside the carrier")
                if x in block_of:
                    raise ValueError(f"{x} lies in two atoms")
                block_of[x] = i
        if len(block_of) != self.carrier.bound:
            missing = sorted(set(self.carrier) - set(block_of))[:5]
            raise ValueError(f"atoms do not cover the carrier, missing {missing}")
        self.atoms = tuple(blocks)
        self._block_of = block_of

    def block_of(self, x: int) -> frozenset[int]:
        return self.atoms[self._block_of[x]]

    def index_of(self, x: int) -> int:
        return self._block_of[x]

    def __eq__(self, other):
        return (isinstance(other, AtomPartition) and self.carrier == other.carrier
                and self.atoms == other.atoms)

    def __hash__(self):
        return hash((self.carrier, self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        shown = [sorted(a) for a in self.atoms[:6]]
        more = "..." if len(self.atoms) > 6 else ""
        return f"AtomPartition(N={self.carrier.bound}, atoms={shown}{more})"

    def is_measurable(self, s: Iterable[int]) -> bool:
        s = frozenset(s)
        return all(self.block_of(x) <= s for x in s)

    def singletons(self) -> frozenset[int]:
        return frozenset(next(iter(a)) for a in self.atoms if len(a) == 1)

    def is_finer_or_equal(self, other: AtomPartition) -> bool:
        """Every block of self lies inside a block of other."""
        return all(a <= other.block_of(next(iter(a))) for a in self.atoms)

    def to_dict(self) -> dict:
        return {"carrier": self.carrier.bound, "atoms": [sorted(a) for a in self.atoms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> AtomPartition:
        return cls(int(d["carrier"]), d["atoms"])


def discrete_partition(carrier) -> AtomPartition:
    carrier = as_carrier(carrier)
    return AtomPartition(carrier, ([x] for x in carrier))


def borel(topology: Topology) -> AtomPartition:
    """Atoms of the σ-algebra generated by the open sets.

    Partition refinement by the distinct minimal neighborhoods: two points
    share an atom iff they lie in exactly the same neighborhoods. The whole
    carrier never splits anything and is skipped.
    """
    carrier = topology.carrier
    full = carrier.full
    signature = {x: [] for x in carrier}
    distinct = {}
    for nb in topology.neighborhoods():
        if nb is full or nb in distinct:
            continue
        k = distinct[nb] = len(distinct)
        for x in nb:
            signature[x].append(k)
    groups = {}
    for x in carrier:
        groups.setdefault(tuple(signature[x]), []).append(x)
    return AtomPartition(carrier, groups.values())


def _check_same_carrier(parts):
    if len({p.carrier for p in parts}) != 1:
        raise ValueError("carrier mismatch")


def intersect_sigma(partitions: Sequence[AtomPartition]) -> AtomPartition:
    """Atoms of the intersection σ-algebra: connected components of the union
    of the same-block relations."""
    if not partitions:
        raise ValueError("need at least one partition")
    _check_same_carrier(partitions)
    carrier = partitions[0].carrier
    parent = list(range(carrier.bound + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in partitions:
        for blk in p.atoms:
            it = iter(blk)
            r = find(next(it))
            for y in it:
                ry = find(y)
                if ry != r:
                    parent[ry] = r
    comps = {}
    for x in carrier:
        comps.setdefault(find(x), []).append(x)
    return AtomPartition(carrier, comps.values())


@dataclass(frozen=True)
class MeasurabilityVerdict:
    measurable: bool
    witness_block: Optional[frozenset[int]] = None
    zone: str = ""
    skipped: tuple[int, ...] = ()


def check_measurable(fmap, domain: AtomPartition, codomain: AtomPartition,
                     safe: Optional[SafeZone] = None) -> MeasurabilityVerdict:
    """Preimage of every codomain atom must be a union of domain atoms.

    Points whose image leaves the carrier are dropped, and atoms are compared
    only on safe points (default: points whose image stays in the carrier).
    """
    _check_same_carrier([domain, codomain])
    carrier = domain.carrier
    if safe is None:
        safe = image_zone(carrier, fmap)
    N = carrier.bound
    safe_pts = {x for x in carrier if safe(x) and 1 <= fmap(x) <= N}
    skipped = tuple(x for x in carrier if x not in safe_pts)
    # preimage membership is decided by the codomain atom of f(x)
    target = {x: codomain.index_of(fmap(x)) for x in safe_pts}
    seen = {}
    for x in sorted(safe_pts):
        key = domain.index_of(x)
        t = target[x]
        if key in seen and seen[key] != t:
            # the domain atom straddles the preimages of two codomain atoms
            return MeasurabilityVerdict(False, codomain.atoms[t], safe.name, skipped)
        seen.setdefault(key, t)
    return MeasurabilityVerdict(True, zone=safe.name, skipped=skipped)


@dataclass
class TransferVerdict:
    """Outcome of checking measurability transfer to the intersection σ-algebra."""

    per_topology: list[bool]
    premise: bool
    conclusion: Optional[bool]
    intersection: AtomPartition
    note: str = field(default=(
        "finite sample of topologies; checks the mechanism, not the quantifier "
        "over every topology containing the subbasis"))

    @property
    def holds(self) -> bool:
        return not self.premise or bool(self.conclusion)


def measurability_transfer_check(fmap, family: Sequence[Topology],
                                 safe: Optional[SafeZone] = None) -> TransferVerdict:
    """If f is measurable for every Borel σ-algebra in the family, check it is
    measurable for their intersection."""
    if not family:
        raise ValueError("need at least one topology")
    parts = [borel(t) for t in family]
    _check_same_carrier(parts)
    each = [check_measurable(fmap, p, p, safe).measurable for p in parts]
    sigma = intersect_sigma(parts)
    premise = all(each)
    conclusion = check_measurable(fmap, sigma, sigma, safe).measurable if premise else None
    return TransferVerdict(each, premise, conclusion, sigma)


def intersection_structures(family: Sequence[Topology]) -> tuple[Topology, AtomPartition]:
    """Intersection topology and intersection σ-algebra of a family."""
    return intersect_topologies(family), intersect_sigma([borel(t) for t in family])
