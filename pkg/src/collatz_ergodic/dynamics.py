"""Exact orbit computation for the Collatz map and its (a, b) variants."""
from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import kernels

DEFAULT_STEP_LIMIT = 10_000
DEFAULT_VALUE_LIMIT = 2 ** 60

# hash-set path length before switching to Brent's detector
_FAST_PATH_STEPS = 4096


@dataclass(frozen=True)
class CollatzMap:
    """n -> a*n + b for odd n, n/2 for even n."""

    a: int = 3
    b: int = 1
    label: str = ""

    def __post_init__(self):
        if self.a < 1 or self.a % 2 == 0:
            raise ValueError(f"odd multiplier must be a positive odd integer, got {self.a}")
        if self.b % 2 == 0:
            raise ValueError(f"odd offset must be odd so a*n+b is even for odd n, got {self.b}")
        if self.a + self.b <= 0:
            raise ValueError(f"a*n+b must stay positive for odd n >= 1, got a+b={self.a + self.b}")
        if not self.label:
            sign = "+" if self.b >= 0 else "-"
            object.__setattr__(self, "label", f"{self.a}n{sign}{abs(self.b)}")

    def __call__(self, n: int) -> int:
        return self.a * n + self.b if n & 1 else n >> 1

    def to_dict(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> CollatzMap:
        return cls(int(d["a"]), int(d["b"]), d.get("label", ""))


STANDARD = CollatzMap(3, 1)


def step(fmap: CollatzMap, n: int) -> int:
    if n < 1:
        raise ValueError(f"seed must be a positive integer, got {n}")
    return fmap(n)


def canonical_rotation(elements: Iterable[int]) -> tuple[int, ...]:
    elems = tuple(elements)
    if not elems:
        raise ValueError("a cycle needs at least one element")
    k = elems.index(min(elems))
    return elems[k:] + elems[:k]


@dataclass(frozen=True)
class Cycle:
    """A periodic orbit, rotated so its minimum leads."""

    elements: tuple[int, ...]
    _set: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        canon = canonical_rotation(self.elements)
        if len(set(canon)) != len(canon):
            raise ValueError(f"cycle elements must be distinct: {canon}")
        object.__setattr__(self, "elements", canon)
        object.__setattr__(self, "_set", frozenset(canon))

    @property
    def length(self) -> int:
        return len(self.elements)

    @property
    def minimum(self) -> int:
        return self.elements[0]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, n):
        return n in self._set

    def as_set(self) -> frozenset[int]:
        return self._set

    def total(self) -> int:
        return sum(self.elements)

    def is_cycle_of(self, fmap) -> bool:
        e = self.elements
        return all(fmap(e[i]) == e[(i + 1) % len(e)] for i in range(len(e)))

    @classmethod
    def from_point(cls, fmap: CollatzMap, n: int, max_len: int = DEFAULT_STEP_LIMIT) -> Cycle:
        """The cycle through a known periodic point ``n``."""
        out = [n]
        x = fmap(n)
        while x != n:
            out.append(x)
            if len(out) > max_len:
                raise ValueError(f"{n} does not close up within {max_len} steps")
            x = fmap(x)
        return cls(tuple(out))


class Status(enum.Enum):
    CYCLIC = "cyclic"
    ESCAPED = "escaped"


@dataclass(frozen=True)
class OrbitResult:
    seed: int
    tail: tuple[int, ...]
    cycle: Optional[Cycle]
    status: Status
    # rotation of `cycle` as actually traversed from the entry point
    entry_order: tuple[int, ...] = ()

    @property
    def sequence(self) -> tuple[int, ...]:
        """tail followed by the cycle in traversal order."""
        return self.tail + self.entry_order

    def orbit_set(self) -> Optional[frozenset[int]]:
        if self.status is Status.ESCAPED:
            return None
        return frozenset(self.tail) | self.cycle.as_set()


def _escaped(seed):
    return OrbitResult(seed, (), None, Status.ESCAPED)


def _split(seed, seq, mu):
    tail = tuple(seq[:mu])
    loop = tuple(seq[mu:])
    return OrbitResult(seed, tail, Cycle(loop), Status.CYCLIC, loop)


def orbit(fmap: CollatzMap, seed: int, step_limit: int = DEFAULT_STEP_LIMIT,
          value_limit: int = DEFAULT_VALUE_LIMIT) -> OrbitResult:
    """Forward orbit of ``seed`` split into tail and cycle.

    Cyclic when the first repeated value shows up within ``step_limit`` map
    applications and no value along the way exceeds ``value_limit``;
    otherwise Escaped. Short orbits are resolved with a visited set, long
    ones with Brent's detector.
    """
    if seed < 1:
        raise ValueError(f"seed must be a positive integer, got {seed}")
    if step_limit < 1 or value_limit < 1:
        raise ValueError("limits must be positive")
    if seed > value_limit:
        return _escaped(seed)

    seen = {seed: 0}
    seq = [seed]
    x = seed
    for i in range(1, min(step_limit, _FAST_PATH_STEPS) + 1):
        x = fmap(x)
        if x > value_limit:
            return _escaped(seed)
        j = seen.get(x)
        if j is not None:
            return _split(seed, seq, j)
        seen[x] = i
        seq.append(x)
    if step_limit <= _FAST_PATH_STEPS:
        return _escaped(seed)
    del seen, seq

    # Brent: detection happens by hare index 3*(mu+lam)+1 at the latest
    power = 1
    lam = 0
    tort = hare = seed
    p = 0
    while True:
        hare = fmap(hare)
        p += 1
        lam += 1
        if hare > value_limit or p > 3 * step_limit + 2:
            return _escaped(seed)
        if hare == tort:
            break
        if lam == power:
            tort = hare
            power *= 2
            lam = 0
    x = y = seed
    for _ in range(lam):
        y = fmap(y)
    mu = 0
    while x != y:
        x, y = fmap(x), fmap(y)
        mu += 1
    if mu + lam > step_limit:
        return _escaped(seed)
    seq = [seed]
    for _ in range(mu + lam - 1):
        seq.append(fmap(seq[-1]))
    return _split(seed, seq, mu)


def orbit_set(fmap: CollatzMap, n: int, step_limit: int = DEFAULT_STEP_LIMIT,
              value_limit: int = DEFAULT_VALUE_LIMIT) -> Optional[frozenset[int]]:
    """{n, f(n), f(f(n)), ...}, or None when the orbit is undecided within limits."""
    return orbit(fmap, n, step_limit, value_limit).orbit_set()


def is_periodic(fmap: CollatzMap, n: int, step_limit: int = DEFAULT_STEP_LIMIT,
                value_limit: int = DEFAULT_VALUE_LIMIT) -> Optional[Cycle]:
    """The cycle through ``n`` if n is periodic within limits, else None."""
    res = orbit(fmap, n, step_limit, value_limit)
    if res.status is Status.CYCLIC and not res.tail:
        return res.cycle
    return None


@dataclass
class CycleRegistry:
    """Cycles reached from seeds 1..scan_bound, plus the seeds that escaped."""

    fmap: CollatzMap
    scan_bound: int
    step_limit: int
    value_limit: int
    cycles: tuple[Cycle, ...]
    escaped_seeds: frozenset[int] = frozenset()
    # per-seed tables from the scan; not serialized
    tail_len: object = field(default=None, repr=False, compare=False)
    cycle_index: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.cycles = tuple(sorted(self.cycles, key=lambda c: c.minimum))
        self.escaped_seeds = frozenset(self.escaped_seeds)
        seen = set()
        for c in self.cycles:
            if seen & c.as_set():
                raise ValueError("registry cycles must be pairwise disjoint")
            seen |= c.as_set()

    @property
    def map_label(self) -> str:
        return self.fmap.label

    def __len__(self):
        return len(self.cycles)

    def cycle_of(self, n: int) -> Optional[Cycle]:
        for c in self.cycles:
            if n in c.as_set():
                return c
        return None

    def periodic_points(self) -> frozenset[int]:
        out = set()
        for c in self.cycles:
            out |= c.as_set()
        return frozenset(out)

    def key(self) -> dict:
        return {
            "map": self.fmap.to_dict(),
            "scan_bound": str(self.scan_bound),
            "step_limit": str(self.step_limit),
            "value_limit": str(self.value_limit),
        }

    def digest(self) -> str:
        """Digest of the scan parameters; equal digests mean equal registries."""
        blob = json.dumps(self.key(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_dict(self) -> dict:
        d = self.key()
        d["cycles"] = [[str(x) for x in c.elements] for c in self.cycles]
        d["escaped"] = [str(x) for x in sorted(self.escaped_seeds)]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> CycleRegistry:
        fmap = CollatzMap.from_dict(d["map"])
        cycles = [Cycle(tuple(int(x) for x in c)) for c in d["cycles"]]
        for c in cycles:
            if not c.is_cycle_of(fmap):
                raise ValueError(f"{c.elements} is not a cycle of {fmap.label}")
        return cls(fmap, int(d["scan_bound"]), int(d["step_limit"]),
                   int(d["value_limit"]), tuple(cycles),
                   frozenset(int(x) for x in d["escaped"]))

    @classmethod
    def from_json(cls, text: str) -> CycleRegistry:
        return cls.from_dict(json.loads(text))

    def with_cycles(self, extra: Iterable[Cycle]) -> CycleRegistry:
        """Copy with additional cycles appended (used for synthetic what-ifs)."""
        return CycleRegistry(self.fmap, self.scan_bound, self.step_limit,
                             self.value_limit, self.cycles + tuple(extra),
                             self.escaped_seeds)


def find_cycles(fmap: CollatzMap, scan_bound: int, step_limit: int = DEFAULT_STEP_LIMIT,
                value_limit: int = DEFAULT_VALUE_LIMIT, *, memo: bool = True,
                compiled: Optional[bool] = None) -> CycleRegistry:
    """Scan seeds 1..scan_bound and collect every cycle they reach.

    With ``memo`` the scan runs in the seed-table kernel, where each walk
    stops at the first value below its seed. ``memo=False`` runs
    :func:`orbit` on every seed independently; both give the same registry.
    """
    if scan_bound < 1:
        raise ValueError(f"scan_bound must be >= 1, got {scan_bound}")
    if not memo:
        cycles = {}
        escaped = set()
        for s in range(1, scan_bound + 1):
            res = orbit(fmap, s, step_limit, value_limit)
            if res.status is Status.ESCAPED:
                escaped.add(s)
            else:
                cycles[res.cycle.minimum] = res.cycle
        return CycleRegistry(fmap, scan_bound, step_limit, value_limit,
                             tuple(cycles.values()), frozenset(escaped))

    arrays = kernels.scan_seeds(fmap.a, fmap.b, scan_bound, step_limit,
                                value_limit, compiled=compiled)
    cycles = [Cycle.from_point(fmap, m, length) for m, length, _ in arrays.cycles]
    cid = arrays.cycle_id
    escaped = frozenset(int(s) for s in (cid[1:] == kernels.ESCAPED).nonzero()[0] + 1)
    order = sorted(range(len(cycles)), key=lambda k: cycles[k].minimum)
    # remap kernel cycle ids onto the sorted registry order
    remap = {old: new for new, old in enumerate(order)}
    cycle_index = cid.copy()
    for old, new in remap.items():
        cycle_index[cid == old] = new
    return CycleRegistry(fmap, scan_bound, step_limit, value_limit,
                         tuple(cycles[k] for k in order), escaped,
                         tail_len=arrays.tail_len, cycle_index=cycle_index)
