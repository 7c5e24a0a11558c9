"""Topologies on the truncated carrier {1, ..., N}.

A finite topology is stored as its minimal-open-neighborhood function; a set
is open iff it contains the minimal neighborhood of each of its points.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

# brute-force open-set enumeration is only attempted up to this size
BRUTE_FORCE_MAX = 16


@dataclass(frozen=True)
class Carrier:
    bound: int

    def __post_init__(self):
        if self.bound < 4:
            raise ValueError(f"carrier bound must be >= 4 so that {{1,2,4}} fits, got {self.bound}")
        object.__setattr__(self, "_full", frozenset(range(1, self.bound + 1)))

    @property
    def elements(self) -> range:
        return range(1, self.bound + 1)

    @property
    def full(self) -> frozenset[int]:
        return self._full

    def __contains__(self, x) -> bool:
        return isinstance(x, int) and 1 <= x <= self.bound

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return self.bound


def as_carrier(c) -> Carrier:
    return c if isinstance(c, Carrier) else Carrier(int(c))


@dataclass(frozen=True)
class SafeZone:
    """Points whose referenced sets all lie inside the carrier."""

    name: str
    carrier: Carrier
    predicate: Callable[[int], bool] = field(compare=False)

    def __call__(self, x: int) -> bool:
        return x in self.carrier and self.predicate(x)

    def points(self) -> list[int]:
        return [x for x in self.carrier if self(x)]

    def boundary(self) -> list[int]:
        return [x for x in self.carrier if not self(x)]


def everywhere(carrier) -> SafeZone:
    carrier = as_carrier(carrier)
    return SafeZone("everywhere", carrier, lambda x: True)


def image_zone(carrier, fmap) -> SafeZone:
    """Points whose image stays in the carrier (the partial-map domain)."""
    carrier = as_carrier(carrier)
    return SafeZone("image-in-carrier", carrier, lambda x: fmap(x) <= carrier.bound)


def doubling_zone(carrier) -> SafeZone:
    """x with {x, 2x} inside the carrier."""
    carrier = as_carrier(carrier)
    return SafeZone("doubling", carrier, lambda x: 2 * x <= carrier.bound)


def singleton_zone(carrier, fmap) -> SafeZone:
    """Points for which the two-step singleton derivation only uses carrier sets.

    Even 2k needs {k,2k} and {2k,4k}; odd n needs {n,2n} and {m,2m} with
    2m = a*n + b.
    """
    carrier = as_carrier(carrier)
    N = carrier.bound

    def pred(x):
        if x % 2 == 0:
            return 2 * x <= N
        return 2 * x <= N and fmap(x) <= N
    return SafeZone("singleton-derivation", carrier, pred)


def borel_zone(carrier) -> SafeZone:
    """Points whose Borel atom in the generated Collatz topology is provably a
    singleton: odd x needs {x,2x} and {2x,4x}, even x needs {x,2x}."""
    carrier = as_carrier(carrier)
    N = carrier.bound
    return SafeZone("borel-singleton", carrier,
                    lambda x: (4 * x if x % 2 else 2 * x) <= N)


def continuity_zone(carrier, fmap) -> SafeZone:
    """x with {x,2x}, f(x) and {f(x), 2f(x)} all inside the carrier."""
    carrier = as_carrier(carrier)
    N = carrier.bound
    return SafeZone("continuity", carrier,
                    lambda x: 2 * x <= N and 2 * fmap(x) <= N)


@dataclass(frozen=True)
class SubbasisFamily:
    carrier: Carrier
    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        for s in self.sets:
            if not s:
                raise ValueError("subbasis members must be nonempty")
            if not all(x in self.carrier for x in s):
                raise ValueError(f"subbasis member {sorted(s)} leaves the carrier")

    def __contains__(self, s) -> bool:
        return frozenset(s) in self._index()

    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = frozenset(self.sets)
            object.__setattr__(self, "_idx", idx)
        return idx

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)


def collatz_subbasis(carrier, *, clip: bool = False) -> SubbasisFamily:
    """{{n, 2n} : 2n <= N}.

    ``clip`` keeps boundary pairs as {n} instead of dropping them. It exists
    only to inject a known fault into the audits.
    """
    carrier = as_carrier(carrier)
    N = carrier.bound
    sets = [frozenset((n, 2 * n)) for n in range(1, N // 2 + 1)]
    if clip:
        sets += [frozenset((n,)) for n in range(N // 2 + 1, N + 1)]
    return SubbasisFamily(carrier, tuple(sets))


class Topology:
    """A topology on a finite carrier, given by minimal open neighborhoods."""

    __slots__ = ("carrier", "_nbhd", "name")

    def __init__(self, carrier, nbhds: Sequence[Iterable[int]], name: str = "",
                 validate: bool = True):
        self.carrier = as_carrier(carrier)
        N = self.carrier.bound
        if len(nbhds) != N:
            raise ValueError(f"need {N} neighborhoods, got {len(nbhds)}")
        full = self.carrier.full
        nb = []
        for s in nbhds:
            if s is not full:
                s = frozenset(s)
                if len(s) == N and s == full:
                    s = full
            nb.append(s)
        self._nbhd = tuple(nb)
        self.name = name
        if validate:
            self.validate()

    def min_nbhd(self, x: int) -> frozenset[int]:
        return self._nbhd[x - 1]

    def is_full(self, x: int) -> bool:
        return self._nbhd[x - 1] is self.carrier.full

    def __eq__(self, other):
        return (isinstance(other, Topology) and self.carrier == other.carrier
                and self._nbhd == other._nbhd)

    def __hash__(self):
        return hash((self.carrier, self._nbhd))

    def __repr__(self):
        return f"Topology(N={self.carrier.bound}, name={self.name!r})"

    def validate(self) -> None:
        """Check x in U(x) and y in U(x) => U(y) subset of U(x)."""
        full = self.carrier.full
        for x in self.carrier:
            nb = self._nbhd[x - 1]
            if nb is full:
                continue
            if x not in nb:
                raise ValueError(f"{x} is not in its own minimal neighborhood")
            if not nb <= full:
                raise ValueError(f"minimal neighborhood of {x} leaves the carrier")
            for y in nb:
                if not self._nbhd[y - 1] <= nb:
                    raise ValueError(
                        f"preorder violated: {y} in U({x}) but U({y}) not inside U({x})")

    def is_open(self, s: Iterable[int]) -> tuple[bool, Optional[int]]:
        """(True, None) if open, else (False, x) with U(x) not inside s."""
        s = frozenset(s)
        for x in sorted(s):
            if x not in self.carrier:
                raise ValueError(f"{x} is outside the carrier")
            if not self._nbhd[x - 1] <= s:
                return False, x
        return True, None

    def interior(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(s)
        return frozenset(x for x in s if self._nbhd[x - 1] <= s)

    def neighborhoods(self) -> tuple[frozenset[int], ...]:
        return self._nbhd

    def open_masks(self) -> set[int]:
        """Every open set as a bitmask (bit x-1 for point x); small carriers only."""
        if self.carrier.bound > BRUTE_FORCE_MAX:
            raise ValueError(f"open-set enumeration is limited to N <= {BRUTE_FORCE_MAX}")
        opens = {0}
        for nb in set(self._nbhd):
            m = to_mask(nb)
            opens |= {o | m for o in opens}
        return opens

    def opens(self) -> set[frozenset[int]]:
        return {from_mask(m) for m in self.open_masks()}

    def to_dict(self) -> dict:
        return {"carrier": self.carrier.bound,
                "min_nbhd": {str(x): sorted(self._nbhd[x - 1]) for x in self.carrier}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> Topology:
        N = int(d["carrier"])
        nb = d["min_nbhd"]
        return cls(N, [nb[str(x)] for x in range(1, N + 1)])


def to_mask(s: Iterable[int]) -> int:
    m = 0
    for x in s:
        m |= 1 << (x - 1)
    return m


def from_mask(m: int) -> frozenset[int]:
    out = []
    x = 1
    while m:
        if m & 1:
            out.append(x)
        m >>= 1
        x += 1
    return frozenset(out)


def generate(subbasis: SubbasisFamily, name: str = "generated") -> Topology:
    """Coarsest topology containing the subbasis.

    U(x) is the intersection of the members containing x, or the whole
    carrier when no member does.
    """
    carrier = subbasis.carrier
    nb: list = [None] * carrier.bound
    for s in subbasis.sets:
        for x in s:
            cur = nb[x - 1]
            nb[x - 1] = s if cur is None else cur & s
    full = carrier.full
    return Topology(carrier, [full if s is None else s for s in nb], name)


def collatz_topology(carrier, *, clip: bool = False) -> Topology:
    return generate(collatz_subbasis(carrier, clip=clip), "collatz")


def discrete_topology(carrier) -> Topology:
    carrier = as_carrier(carrier)
    return Topology(carrier, [frozenset((x,)) for x in carrier], "discrete")


def witness_topology(carrier) -> Topology:
    """Discrete topology minus the sets containing 1 but not {1, 2}."""
    carrier = as_carrier(carrier)
    nb = [frozenset((1, 2))] + [frozenset((x,)) for x in range(2, carrier.bound + 1)]
    return Topology(carrier, nb, "witness")


class Comparison(enum.Enum):
    STRICTLY_COARSER = "strictly-coarser"
    EQUAL = "equal"
    STRICTLY_FINER = "strictly-finer"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class CoarsenessResult:
    relation: Comparison
    # an open of t1 that is not open in t2, and vice versa
    only_in_first: Optional[frozenset[int]] = None
    only_in_second: Optional[frozenset[int]] = None


def _check_same_carrier(ts):
    carriers = {t.carrier for t in ts}
    if len(carriers) != 1:
        raise ValueError(f"carrier mismatch: {sorted(c.bound for c in carriers)}")


def is_coarser(t1: Topology, t2: Topology) -> CoarsenessResult:
    """Compare t1 and t2 as families of open sets.

    t1 is contained in t2 iff U2(x) is inside U1(x) for every x. A failing x
    gives U1(x) as an open of t1 missing from t2.
    """
    _check_same_carrier([t1, t2])
    only1 = only2 = None
    for x in t1.carrier:
        u1, u2 = t1.min_nbhd(x), t2.min_nbhd(x)
        if only1 is None and not u2 <= u1:
            only1 = u1
        if only2 is None and not u1 <= u2:
            only2 = u2
        if only1 is not None and only2 is not None:
            break
    if only1 is None and only2 is None:
        rel = Comparison.EQUAL
    elif only1 is None:
        rel = Comparison.STRICTLY_COARSER
    elif only2 is None:
        rel = Comparison.STRICTLY_FINER
    else:
        rel = Comparison.INCOMPARABLE
    return CoarsenessResult(rel, only1, only2)


def intersect_topologies(topologies: Sequence[Topology]) -> Topology:
    """Common open sets of several topologies.

    U(x) is the set reachable from x through the union of the specialization
    relations. For N <= BRUTE_FORCE_MAX the result is certified against
    direct enumeration of the common opens.
    """
    if not topologies:
        raise ValueError("need at least one topology")
    _check_same_carrier(topologies)
    carrier = topologies[0].carrier
    if len(topologies) == 1:
        return topologies[0]
    full = carrier.full
    if all(t == topologies[0] for t in topologies[1:]):
        return topologies[0]
    nb = []
    for x in carrier:
        if any(t.is_full(x) for t in topologies):
            nb.append(full)
            continue
        reach = {x}
        todo = [x]
        while todo:
            y = todo.pop()
            for t in topologies:
                if t.is_full(y):
                    reach = full
                    todo = []
                    break
                new = t.min_nbhd(y) - reach
                if new:
                    reach |= new
                    todo.extend(new)
        nb.append(full if reach is full else frozenset(reach))
    result = Topology(carrier, nb, "intersection")
    if carrier.bound <= BRUTE_FORCE_MAX:
        common = set.intersection(*(t.open_masks() for t in topologies))
        if common != result.open_masks():
            raise RuntimeError("neighborhood reconstruction disagrees with enumerated common opens")
    return result


@dataclass(frozen=True)
class ContinuityVerdict:
    continuous: bool
    witness_set: Optional[frozenset[int]] = None
    witness_point: Optional[int] = None
    zone: str = ""
    skipped: tuple[int, ...] = ()


def check_continuity(fmap, domain: Topology, codomain: Topology,
                     safe: Optional[SafeZone] = None) -> ContinuityVerdict:
    """Preimage of each codomain minimal neighborhood must be open.

    f is only partially defined on the truncation: points whose image leaves
    the carrier are dropped, and openness is tested in the subspace of safe
    points (default: points whose image stays in the carrier).
    """
    _check_same_carrier([domain, codomain])
    carrier = domain.carrier
    N = carrier.bound
    if safe is None:
        safe = image_zone(carrier, fmap)
    image = {}
    for x in carrier:
        y = fmap(x)
        if 1 <= y <= N:
            image[x] = y
    safe_pts = frozenset(x for x in image if safe(x))
    skipped = tuple(x for x in carrier if x not in safe_pts)
    seen = set()
    for v in sorted(set(codomain.neighborhoods()), key=min):
        if v in seen:
            continue
        seen.add(v)
        pre = frozenset(x for x, y in image.items() if y in v)
        for x in sorted(pre & safe_pts):
            if not (domain.min_nbhd(x) & safe_pts) <= pre:
                return ContinuityVerdict(False, v, x, safe.name, skipped)
    return ContinuityVerdict(True, zone=safe.name, skipped=skipped)


@dataclass(frozen=True)
class DerivationStep:
    point: int
    rule: str  # "even" or "odd"
    left: frozenset[int]
    right: frozenset[int]
    # for odd points: the full preimage f^-1({m, 2m}) inside the carrier
    preimage: Optional[frozenset[int]] = None

    @property
    def result(self) -> frozenset[int]:
        return self.left & self.right


@dataclass
class DerivationLog:
    steps: list[DerivationStep]
    failed: list[int]
    skipped: list[int]

    @property
    def success(self) -> bool:
        return not self.failed

    def derived(self) -> set[int]:
        return {s.point for s in self.steps}


def derive_singletons(carrier, subbasis: SubbasisFamily, fmap) -> DerivationLog:
    """Show every safe singleton is open once f is continuous.

    Even 2k: {k,2k} & {2k,4k}. Odd n: {n,2n} & f^-1({m,2m}) where 2m = a*n+b;
    the preimage is open by continuity and meets {n,2n} exactly in n. The
    right-hand set is logged as {n, a*n+b}, the part of the preimage the
    argument needs.
    """
    carrier = as_carrier(carrier)
    zone = singleton_zone(carrier, fmap)
    steps, failed, skipped = [], [], []
    for x in carrier:
        if not zone(x):
            skipped.append(x)
            continue
        if x % 2 == 0:
            k = x // 2
            left, right = frozenset((k, x)), frozenset((x, 2 * x))
            if left in subbasis and right in subbasis and left & right == {x}:
                steps.append(DerivationStep(x, "even", left, right))
            else:
                failed.append(x)
            continue
        img = fmap(x)
        pair = frozenset((img // 2, img))
        left = frozenset((x, 2 * x))
        if img % 2 or left not in subbasis or pair not in subbasis:
            failed.append(x)
            continue
        pre = frozenset(y for y in carrier if fmap(y) in pair)
        right = frozenset((x, img))
        if right <= pre and left & pre == {x}:
            steps.append(DerivationStep(x, "odd", left, right, pre))
        else:
            failed.append(x)
    return DerivationLog(steps, failed, skipped)


def replay_derivation(log: DerivationLog, fmap) -> bool:
    """Every logged step matches one of the two intersection patterns exactly."""
    for s in log.steps:
        x = s.point
        if s.rule == "even":
            ok = (x % 2 == 0 and s.left == {x // 2, x} and s.right == {x, 2 * x})
        else:
            ok = (x % 2 == 1 and s.left == {x, 2 * x} and s.right == {x, fmap(x)}
                  and s.preimage is not None and s.left & s.preimage == {x})
        if not ok or s.result != {x}:
            return False
    return True


def orbit_open_witness(y: int, x: int, carrier) -> list[frozenset[int]]:
    """Subbasis pairs whose union is the doubling chain {y, 2y, ..., 2^x y}.

    x = 0 gives an empty list: {y} alone need not be open.
    """
    carrier = as_carrier(carrier)
    if y < 1 or x < 0:
        raise ValueError("need y >= 1 and x >= 0")
    if (2 ** x) * y > carrier.bound:
        raise ValueError(f"chain {y}*2^{x} exceeds carrier bound {carrier.bound}")
    return [frozenset((y * 2 ** i, y * 2 ** (i + 1))) for i in range(x)]
