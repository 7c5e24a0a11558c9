"""Time the seed-scan and recurrence kernels compiled vs uncompiled.

    python3 benchmarks/bench_kernels.py --scan 20000 --repeat 3
"""
import argparse
import time

import numpy as np

from collatz_ergodic import kernels, topology
from collatz_ergodic._accel import NUMBA_ENABLED
from collatz_ergodic.dynamics import CollatzMap, find_cycles


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_scan(fmap, scan, repeat):
    rows = []
    for compiled in (True, False):
        if compiled and not NUMBA_ENABLED:
            continue
        if compiled:  # warm the JIT outside the timed region
            kernels.scan_seeds(fmap.a, fmap.b, 10, 100, 10 ** 9, compiled=True)
        t, out = best_of(lambda: kernels.scan_seeds(fmap.a, fmap.b, scan, 10_000, 2 ** 60,
                                                    compiled=compiled), repeat)
        rows.append(("scan", compiled, t, out))
    if len(rows) == 2:
        assert np.array_equal(rows[0][3].tail_len, rows[1][3].tail_len)
    return rows


def bench_recurrence(fmap, scan, repeat):
    N = 2 * scan
    topo = topology.collatz_topology(N)
    reg = find_cycles(fmap, scan)
    seeds = list(range(1, scan + 1))
    steps = [int(reg.tail_len[s]) + reg.cycles[reg.cycle_index[s]].length for s in seeds]
    nbs = [topo.min_nbhd(s) for s in seeds]
    rows = []
    for compiled in (True, False):
        if compiled and not NUMBA_ENABLED:
            continue
        if compiled:
            kernels.recurrence_flags(fmap.a, fmap.b, seeds[:2], steps[:2], nbs[:2], 2 ** 60,
                                     compiled=True)
        t, out = best_of(lambda: kernels.recurrence_flags(fmap.a, fmap.b, seeds, steps, nbs,
                                                          2 ** 60, compiled=compiled), repeat)
        rows.append(("recurrence", compiled, t, out))
    if len(rows) == 2:
        assert np.array_equal(rows[0][3], rows[1][3])
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scan", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    fmap = CollatzMap(3, 1)
    print(f"numba enabled: {NUMBA_ENABLED}; seeds 1..{args.scan}; best of {args.repeat}")
    rows = bench_scan(fmap, args.scan, args.repeat) + bench_recurrence(fmap, args.scan, args.repeat)
    by_kernel = {}
    for name, compiled, t, _ in rows:
        mode = "numba" if compiled else "fallback"
        print(f"{name:<11} {mode:<9} {t * 1e3:10.2f} ms")
        by_kernel.setdefault(name, {})[mode] = t
    for name, d in by_kernel.items():
        if len(d) == 2:
            print(f"{name:<11} speedup   {d['fallback'] / d['numba']:10.1f}x")


if __name__ == "__main__":
    main()
