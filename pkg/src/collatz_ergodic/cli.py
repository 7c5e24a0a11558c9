"""Command-line front end.

Exit codes: 0 ok, 1 check failed, 2 orbit escaped, 3 empty registry,
64 usage error, 74 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import dynamics, measurable, measure, thermo, topology
from .dynamics import CollatzMap, CycleRegistry, Status

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ESCAPED = 2
EXIT_EMPTY_REGISTRY = 3
EXIT_USAGE = 64
EXIT_IO = 74

DEFAULTS = {
    "map": "3,1",
    "carrier": None,
    "scan": 10_000,
    "steps": dynamics.DEFAULT_STEP_LIMIT,
    "values": dynamics.DEFAULT_VALUE_LIMIT,
    "format": "json",
    "cache": None,
    "seed": 0,
}
DEFAULT_AUDIT_CARRIER = 64
# RunConfig field names are accepted in config files too
CONFIG_ALIASES = {"carrier_bound": "carrier", "scan_bound": "scan", "step_limit": "steps",
                  "value_limit": "values", "output_format": "format",
                  "registry_cache_path": "cache"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    fmap: CollatzMap
    carrier_bound: Optional[int]
    scan_bound: int
    step_limit: int
    value_limit: int
    output_format: str = "json"
    registry_cache_path: Optional[Path] = None
    seed: int = 0
    clip_subbasis: bool = False

    def __post_init__(self):
        for name in ("scan_bound", "step_limit", "value_limit"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        if self.carrier_bound is not None and self.carrier_bound < 4:
            raise UsageError("carrier must be at least 4")
        if self.output_format not in ("json", "csv", "text"):
            raise UsageError(f"unknown format {self.output_format!r}")

    def carrier(self, default: int) -> int:
        return self.carrier_bound if self.carrier_bound is not None else default


def parse_map(text: str) -> CollatzMap:
    parts = [p.strip() for p in str(text).split(",")]
    try:
        a, b = int(parts[0]), int(parts[1])
    except (ValueError, IndexError):
        raise UsageError(f"--map expects 'a,b', got {text!r}") from None
    label = parts[2] if len(parts) > 2 else ""
    try:
        return CollatzMap(a, b, label)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int(text, name):
    try:
        return int(str(text).replace("_", ""))
    except ValueError:
        raise UsageError(f"{name} expects an integer, got {text!r}") from None


def read_config_file(path: str) -> dict:
    """key = value lines; '#' comments allowed."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    cp.read_string("[run]\n" + text)
    out = {}
    for k, v in cp["run"].items():
        key = k.replace("-", "_")
        key = CONFIG_ALIASES.get(key, key)
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        out[key] = v.strip().strip('"').strip("'")
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return RunConfig(
        fmap=parse_map(merged["map"]),
        carrier_bound=None if merged["carrier"] is None else _int(merged["carrier"], "--carrier"),
        scan_bound=_int(merged["scan"], "--scan"),
        step_limit=_int(merged["steps"], "--steps"),
        value_limit=_int(merged["values"], "--values"),
        output_format=str(merged["format"]),
        registry_cache_path=Path(merged["cache"]) if merged["cache"] else None,
        seed=_int(merged["seed"], "--seed"),
        clip_subbasis=getattr(args, "clip_subbasis", False),
    )


# ---------------------------------------------------------------- output

def emit(rows, fmt: str, out=None, *, stream: bool = False):
    """Write a dict (or list of dicts when ``stream``) in the chosen format."""
    out = out or sys.stdout
    items = rows if stream else [rows]
    if fmt == "json":
        for r in items:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    elif fmt == "csv":
        keys = sorted({k for r in items for k in r})
        w = csv.DictWriter(out, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in items:
            w.writerow({k: _flat(v) for k, v in r.items()})
    else:
        for r in items:
            out.write("  ".join(f"{k}={_flat(v)}" for k, v in sorted(r.items())) + "\n")


def _flat(v):
    if isinstance(v, (list, tuple)):
        return ",".join(_flat(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _ints(xs):
    return [str(x) for x in xs]


# ---------------------------------------------------------------- registry

def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def obtain_registry(cfg: RunConfig, notes=None) -> CycleRegistry:
    """Load the cached registry when its scan parameters match, else scan."""
    path = cfg.registry_cache_path
    wanted = CycleRegistry(cfg.fmap, cfg.scan_bound, cfg.step_limit, cfg.value_limit, ())
    if path is not None and path.exists():
        try:
            cached = CycleRegistry.from_json(path.read_text())
        except (ValueError, KeyError):
            cached = None
        if cached is not None and cached.key() == wanted.key():
            if notes is not None:
                notes.append("cache hit")
            return cached
    reg = dynamics.find_cycles(cfg.fmap, cfg.scan_bound, cfg.step_limit, cfg.value_limit)
    if path is not None:
        write_atomic(path, reg.to_json())
        if notes is not None:
            notes.append("cache written")
    return reg


# ---------------------------------------------------------------- commands

def cmd_orbit(cfg: RunConfig, seed_text: str) -> int:
    try:
        seed = int(seed_text)
    except ValueError:
        raise UsageError(f"seed must be a positive integer, got {seed_text!r}") from None
    if seed < 1:
        raise UsageError(f"seed must be a positive integer, got {seed}")
    res = dynamics.orbit(cfg.fmap, seed, cfg.step_limit, cfg.value_limit)
    row = {
        "map": cfg.fmap.label,
        "seed": str(seed),
        "status": res.status.value,
        "tail": _ints(res.tail),
        "cycle": _ints(res.cycle.elements) if res.cycle else [],
    }
    emit(row, cfg.output_format)
    return EXIT_OK if res.status is Status.CYCLIC else EXIT_ESCAPED


def cmd_cycles(cfg: RunConfig) -> int:
    notes: list[str] = []
    reg = obtain_registry(cfg, notes)
    for n in notes:
        print(n, file=sys.stderr)
    if cfg.output_format == "json":
        sys.stdout.write(reg.to_json())
    else:
        rows = [{"cycle_min": str(c.minimum), "length": c.length, "elements": _ints(c.elements)}
                for c in reg.cycles]
        emit(rows, cfg.output_format, stream=True)
    return EXIT_OK


def _verdict(check, ok, witnesses=None, skipped=(), expected=None):
    row = {"check": check, "status": "pass" if ok else "fail",
           "witnesses": witnesses or {}, "skipped_boundary": len(skipped)}
    if expected:
        row["expected"] = expected
    return row


def topology_audit(cfg: RunConfig) -> list[dict]:
    N = cfg.carrier(DEFAULT_AUDIT_CARRIER)
    fmap = cfg.fmap
    carrier = topology.Carrier(N)
    sub = topology.collatz_subbasis(carrier, clip=cfg.clip_subbasis)
    gen = topology.generate(sub, "collatz")
    disc = topology.discrete_topology(carrier)
    wit = topology.witness_topology(carrier)
    rows = []

    # points above N/2 have no doubling partner, so no pair or chain starts there
    upper = range(N // 2 + 1, N + 1)
    bad = [sorted(s) for s in sub if not gen.is_open(s)[0]]
    rows.append(_verdict("subbasis-open", not bad, {"not_open": bad[:5]}, upper))

    ok, w = gen.is_open({1, 2, 4})
    rows.append(_verdict("orbit-124-open", ok, {"point": w} if w else {}))

    chains = []
    for y in range(1, N // 2 + 1):
        x = 1
        while 2 ** x * y <= N:
            union = frozenset().union(*topology.orbit_open_witness(y, x, carrier))
            if not gen.is_open(union)[0]:
                chains.append([y, x])
            x += 1
    rows.append(_verdict("doubling-chains-open", not chains, {"not_open": chains[:5]}, upper))

    zone = topology.SafeZone("even-singleton", carrier, lambda x: x % 2 == 0 and 2 * x <= N)
    evens = zone.points()
    bad = [x for x in evens if not gen.is_open({x})[0]]
    rows.append(_verdict("even-singletons-open", not bad, {"not_open": bad[:5]},
                         [x for x in carrier if x % 2 == 0 and not zone(x)]))

    bad = [x for x in carrier if x % 2 == 1 and gen.is_open({x})[0]]
    rows.append(_verdict("odd-singletons-not-open", not bad, {"open": bad[:5]}))

    cmp = topology.is_coarser(gen, disc)
    w = cmp.only_in_second
    rows.append(_verdict(
        "coarser-than-discrete",
        cmp.relation is topology.Comparison.STRICTLY_COARSER and w is not None
        and len(w) == 1 and next(iter(w)) % 2 == 1,
        {"relation": cmp.relation.value, "open_only_in_discrete": sorted(w or ())}))

    try:
        wit.validate()
        wit_ok = True
    except ValueError:
        wit_ok = False
    missing = [sorted(s) for s in topology.collatz_subbasis(carrier) if not wit.is_open(s)[0]]
    atoms_ok = all(len(a) == 1 for a in measurable.borel(wit).atoms)
    rows.append(_verdict("witness-topology", wit_ok and not missing and atoms_ok,
                         {"missing_subbasis": missing[:5], "borel_all_singletons": atoms_ok}))

    log = topology.derive_singletons(carrier, sub, fmap)
    rows.append(_verdict("derive-singletons",
                         log.success and topology.replay_derivation(log, fmap),
                         {"derived": len(log.steps), "failed": log.failed[:5]}, log.skipped))

    v = topology.check_continuity(fmap, gen, gen, topology.continuity_zone(carrier, fmap))
    wit_info = ({"open_set": sorted(v.witness_set), "point": v.witness_point}
                if not v.continuous else {})
    # an odd safe point is where a discontinuity can show; none means no evidence
    if any(x % 2 for x in topology.continuity_zone(carrier, fmap).points()):
        rows.append(_verdict("f-continuous-under-T", not v.continuous, wit_info, v.skipped,
                             expected="discontinuous"))
    else:
        rows.append({"check": "f-continuous-under-T", "status": "skipped",
                     "witnesses": {}, "skipped_boundary": N, "expected": "discontinuous"})

    v = topology.check_continuity(fmap, disc, disc)
    rows.append(_verdict("f-continuous-under-discrete", v.continuous, {}, v.skipped))

    for r in rows:
        r["carrier"] = N
    return rows


def cmd_topology_audit(cfg: RunConfig) -> int:
    rows = topology_audit(cfg)
    emit(rows, cfg.output_format, stream=True)
    return EXIT_OK if all(r["status"] != "fail" for r in rows) else EXIT_CHECK_FAILED


def sigma_audit(cfg: RunConfig) -> list[dict]:
    N = cfg.carrier(DEFAULT_AUDIT_CARRIER)
    fmap = cfg.fmap
    carrier = topology.Carrier(N)
    gen = topology.collatz_topology(carrier, clip=cfg.clip_subbasis)
    wit = topology.witness_topology(carrier)
    disc = topology.discrete_topology(carrier)
    rows = []

    part = measurable.borel(gen)
    zone = topology.borel_zone(carrier)
    lumped = [x for x in zone.points() if len(part.block_of(x)) != 1]
    rows.append(_verdict("borel-safe-singletons", not lumped, {"lumped": lumped[:5]},
                         zone.boundary()))

    wpart = measurable.borel(wit)
    rows.append(_verdict("borel-witness-power-set", all(len(a) == 1 for a in wpart.atoms)))

    v = measurable.check_measurable(fmap, part, part, zone)
    rows.append(_verdict("f-measurable-borel-T", v.measurable,
                         {"block": sorted(v.witness_block)} if v.witness_block else {},
                         v.skipped))

    t = measurable.measurability_transfer_check(fmap, [disc, wit, gen], zone)
    rows.append(_verdict("transfer-to-intersection", t.holds,
                         {"per_topology": t.per_topology, "premise": t.premise,
                          "atoms": len(t.intersection), "note": t.note}))
    for r in rows:
        r["carrier"] = N
    return rows


def cmd_sigma_audit(cfg: RunConfig) -> int:
    rows = sigma_audit(cfg)
    emit(rows, cfg.output_format, stream=True)
    return EXIT_OK if all(r["status"] != "fail" for r in rows) else EXIT_CHECK_FAILED


def cmd_recurrence(cfg: RunConfig) -> int:
    N = cfg.carrier(2 * cfg.scan_bound)
    if 2 * cfg.scan_bound > N:
        raise UsageError(f"recurrence needs carrier >= 2*scan ({2 * cfg.scan_bound}), got {N}")
    topo = topology.collatz_topology(N)
    rep = measure.recurrence_scan(cfg.fmap, topo, cfg.scan_bound, cfg.step_limit,
                                  cfg.value_limit)
    row = {
        "map": cfg.fmap.label,
        "carrier": N,
        "scan_bound": cfg.scan_bound,
        "recurrent": _ints(sorted(rep.recurrent)),
        "periodic": _ints(sorted(rep.periodic)),
        "skipped": len(rep.skipped),
        "recurrent_equals_periodic": rep.consistent,
    }
    emit(row, cfg.output_format)
    return EXIT_OK if rep.consistent else EXIT_CHECK_FAILED


def _select_potential(name: str, reg: CycleRegistry, carrier, cfg: RunConfig):
    if name == "key":
        return thermo.key_potential(reg.fmap, carrier, cfg.step_limit, cfg.value_limit)
    if name == "literal-key":
        return thermo.literal_key_potential(reg.fmap, carrier, cfg.step_limit, cfg.value_limit)
    if name == "union":
        return thermo.indicator_potential(reg.periodic_points(), carrier, "indicator:union")
    if name.startswith("const:"):
        return thermo.constant_potential(carrier, name.split(":", 1)[1])
    if name.startswith("cycle:"):
        c = reg.cycle_of(_int(name.split(":", 1)[1], "--potential cycle:"))
        if c is None:
            raise UsageError(f"{name}: no registry cycle through that point")
        return thermo.indicator_potential(c.elements, carrier, f"indicator:cycle-{c.minimum}")
    raise UsageError(f"unknown potential {name!r}")


def cmd_pressure(cfg: RunConfig, potential: str) -> int:
    reg = obtain_registry(cfg)
    if not reg.cycles:
        print("no invariant probabilities discovered", file=sys.stderr)
        return EXIT_EMPTY_REGISTRY
    carrier = thermo.report_carrier(reg)
    phi = _select_potential(potential, reg, carrier, cfg)
    eq = thermo.equilibrium_states(phi, reg)
    row = {
        "map": reg.fmap.to_dict(),
        "registry_digest": reg.digest(),
        "cycles": len(reg.cycles),
        "battery": [{"potential": phi.label, "pressure": str(eq.pressure),
                     "argmax": _ints(c.minimum for c in eq.generators),
                     "exists": True, "unique": eq.unique}],
        "verdict": ("unique equilibrium state" if eq.unique else
                    f"{len(eq.generators)} ergodic equilibrium states") + " relative to registry",
    }
    if cfg.output_format == "json":
        emit(row, "json")
    else:
        emit([dict(b, registry_digest=row["registry_digest"]) for b in row["battery"]],
             cfg.output_format, stream=True)
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    reg = obtain_registry(cfg)
    if not reg.cycles:
        print("no invariant probabilities discovered", file=sys.stderr)
        if cfg.output_format == "json":
            emit(thermo.dichotomy_report(reg), "json")
        return EXIT_EMPTY_REGISTRY
    rep = thermo.dichotomy_report(reg, None, cfg.step_limit, cfg.value_limit, seed=cfg.seed)
    if cfg.output_format == "json":
        emit(rep, "json")
    else:
        emit(rep["battery"], cfg.output_format, stream=True)
        print(f"# {rep['verdict']}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--map", help="odd-branch coefficients 'a,b' (default 3,1)")
    common.add_argument("--carrier", help="carrier bound N")
    common.add_argument("--scan", help="scan seeds 1..S")
    common.add_argument("--steps", help="step limit per orbit")
    common.add_argument("--values", help="value limit per orbit")
    common.add_argument("--format", choices=("json", "csv", "text"))
    common.add_argument("--cache", help="registry cache file (.cycles.json)")
    common.add_argument("--seed", help="seed for random batteries")
    common.add_argument("--config", help="key=value run configuration file")
    # fault injection for the audit tests
    common.add_argument("--clip-subbasis", action="store_true", help=argparse.SUPPRESS)

    p = _Parser(prog="collatz-ergodic", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)
    o = sub.add_parser("orbit", parents=[common], help="tail and cycle of one seed")
    o.add_argument("n")
    sub.add_parser("cycles", parents=[common], help="scan seeds and write the cycle registry")
    sub.add_parser("topology-audit", parents=[common], help="openness, coarseness, derivation and continuity checks")
    sub.add_parser("sigma-audit", parents=[common], help="Borel atom and measurability checks")
    sub.add_parser("recurrence", parents=[common], help="recurrent vs periodic seeds")
    pr = sub.add_parser("pressure", parents=[common], help="pressure of one potential")
    pr.add_argument("--potential", default="key",
                    help="key | literal-key | union | const:C | cycle:N")
    sub.add_parser("report", parents=[common], help="equilibrium-state dichotomy report")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "orbit":
            return cmd_orbit(cfg, args.n)
        if args.command == "cycles":
            return cmd_cycles(cfg)
        if args.command == "topology-audit":
            return cmd_topology_audit(cfg)
        if args.command == "sigma-audit":
            return cmd_sigma_audit(cfg)
        if args.command == "recurrence":
            return cmd_recurrence(cfg)
        if args.command == "pressure":
            return cmd_pressure(cfg, args.potential)
        return cmd_report(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
