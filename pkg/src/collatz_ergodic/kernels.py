"""Hot integer loops: the memoized seed scan and the recurrence sweep.

Both kernels are written once. With numba they are compiled for int64
arrays; without it (or for values past int64) the same source runs as plain
Python over numpy arrays, and over object arrays for big integers.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, optional_njit, python_impl

UNSEEN = -2
ESCAPED = -1
INT64_MAX = np.iinfo(np.int64).max


@optional_njit(cache=True)
def _scan_kernel(a, b, scan_bound, step_limit, value_limit,
                 tail_len, cycle_id, peak,
                 cyc_min, cyc_len, cyc_peak, cyc_start, cyc_elems):
    """Classify seeds 1..scan_bound in increasing order.

    Every value below the current seed has already been classified, so a walk
    stops at the first such value and inherits its tail length and cycle.
    Walks that stay above the seed run Brent's detector. Returns the number
    of cycles found, or -1 when the cycle tables are full.
    """
    ncyc = 0
    nelem = 0
    up_cap = (value_limit - b) // a
    hare_cap = 3 * step_limit + 3
    for s in range(1, scan_bound + 1):
        if cycle_id[s] != UNSEEN:
            continue
        if s > value_limit:
            cycle_id[s] = ESCAPED
            continue
        tort = s
        hare = s
        power = 1
        lam = 0
        p = 0
        pk = s
        status = 0
        while True:
            if hare % 2 == 1:
                if hare > up_cap:
                    status = 2
                    break
                hare = a * hare + b
            else:
                hare = hare // 2
            p += 1
            lam += 1
            if hare > pk:
                pk = hare
            if hare < s:
                status = 3
                break
            if hare == tort:
                status = 1
                break
            if p >= hare_cap:
                status = 2
                break
            if lam == power:
                tort = hare
                power *= 2
                lam = 0

        if status == 2:
            cycle_id[s] = ESCAPED
            continue

        if status == 3:
            v = hare
            cid = cycle_id[v]
            if cid == ESCAPED:
                cycle_id[s] = ESCAPED
                continue
            tl = p + tail_len[v]
            if tail_len[v] == 0:
                # v is on its cycle; the path may have entered it earlier,
                # through elements above scan_bound that were never marked.
                lo = cyc_start[cid]
                hi = lo + cyc_len[cid]
                x = s
                j = 0
                while j < p:
                    # binary search of the sorted cycle slice
                    l, h = lo, hi
                    while l < h:
                        mid = (l + h) // 2
                        if cyc_elems[mid] < x:
                            l = mid + 1
                        else:
                            h = mid
                    if l < hi and cyc_elems[l] == x:
                        break
                    if x % 2 == 1:
                        x = a * x + b
                    else:
                        x = x // 2
                    j += 1
                tl = j
            if tl + cyc_len[cid] > step_limit:
                cycle_id[s] = ESCAPED
                continue
            tail_len[s] = tl
            cycle_id[s] = cid
            pv = peak[v]
            peak[s] = pk if pk > pv else pv
            continue

        # status 1: Brent found a cycle of length lam with all values >= s
        x = s
        y = s
        for _ in range(lam):
            y = a * y + b if y % 2 == 1 else y // 2
        mu = 0
        while x != y:
            x = a * x + b if x % 2 == 1 else x // 2
            y = a * y + b if y % 2 == 1 else y // 2
            mu += 1
        if mu + lam > step_limit:
            cycle_id[s] = ESCAPED
            continue
        m = x
        cmax = x
        z = x
        for _ in range(lam):
            z = a * z + b if z % 2 == 1 else z // 2
            if z < m:
                m = z
            if z > cmax:
                cmax = z
        cid = -1
        for k in range(ncyc):
            if cyc_min[k] == m:
                cid = k
                break
        if cid == -1:
            if ncyc >= len(cyc_min) or nelem + lam > len(cyc_elems):
                return -1
            cid = ncyc
            ncyc += 1
            cyc_min[cid] = m
            cyc_len[cid] = lam
            cyc_peak[cid] = cmax
            cyc_start[cid] = nelem
            z = m
            for k in range(lam):
                cyc_elems[nelem + k] = z
                z = a * z + b if z % 2 == 1 else z // 2
            cyc_elems[nelem:nelem + lam] = np.sort(cyc_elems[nelem:nelem + lam])
            nelem += lam
        tail_len[s] = mu
        cycle_id[s] = cid
        peak[s] = pk
        z = m
        for _ in range(lam):
            if z <= scan_bound and cycle_id[z] == UNSEEN:
                tail_len[z] = 0
                cycle_id[z] = cid
                peak[z] = cmax
            z = a * z + b if z % 2 == 1 else z // 2
    return ncyc


@optional_njit(cache=True)
def _recurrence_kernel(a, b, seeds, steps, nb_ptr, nb_idx, out):
    """out[i] = 1 iff some iterate f^k(seeds[i]), 1 <= k <= steps[i], lies in
    the i-th neighborhood slice of nb_idx (sorted)."""
    for i in range(len(seeds)):
        y = seeds[i]
        lo = nb_ptr[i]
        hi = nb_ptr[i + 1]
        out[i] = 0
        for _ in range(steps[i]):
            y = a * y + b if y % 2 == 1 else y // 2
            l, h = lo, hi
            while l < h:
                mid = (l + h) // 2
                if nb_idx[mid] < y:
                    l = mid + 1
                else:
                    h = mid
            if l < hi and nb_idx[l] == y:
                out[i] = 1
                break
    return out


def fits_int64(a, b, value_limit):
    """True when every value the kernels touch stays inside int64.

    a*x + b is only formed for x <= (value_limit - b) // a, so the result
    never exceeds value_limit.
    """
    return 0 < value_limit <= INT64_MAX - abs(b) and a <= INT64_MAX


class ScanArrays:
    """Raw per-seed tables produced by :func:`scan_seeds`."""

    def __init__(self, tail_len, cycle_id, peak, cycles):
        self.tail_len = tail_len
        self.cycle_id = cycle_id
        self.peak = peak
        # list of (min element, length, peak)
        self.cycles = cycles


def scan_seeds(a, b, scan_bound, step_limit, value_limit, *, compiled=None,
               cycle_capacity=256, element_capacity=1 << 14):
    """Run the seed scan, picking int64 or big-integer arrays as needed.

    ``compiled=False`` forces the uncompiled kernel even when numba is active.
    """
    use_int64 = fits_int64(a, b, value_limit)
    if compiled is None:
        compiled = NUMBA_ENABLED
    compiled = compiled and NUMBA_ENABLED and use_int64
    kernel = _scan_kernel if compiled else python_impl(_scan_kernel)
    val_dtype = np.int64 if use_int64 else object

    while True:
        tail_len = np.zeros(scan_bound + 1, dtype=np.int64)
        cycle_id = np.full(scan_bound + 1, UNSEEN, dtype=np.int64)
        peak = np.zeros(scan_bound + 1, dtype=val_dtype)
        cyc_min = np.zeros(cycle_capacity, dtype=val_dtype)
        cyc_len = np.zeros(cycle_capacity, dtype=np.int64)
        cyc_peak = np.zeros(cycle_capacity, dtype=val_dtype)
        cyc_start = np.zeros(cycle_capacity, dtype=np.int64)
        cyc_elems = np.zeros(element_capacity, dtype=val_dtype)
        if compiled:
            args = (np.int64(a), np.int64(b), np.int64(scan_bound),
                    np.int64(step_limit), np.int64(value_limit))
        else:
            args = (a, b, scan_bound, step_limit, value_limit)
        ncyc = kernel(*args, tail_len, cycle_id, peak,
                      cyc_min, cyc_len, cyc_peak, cyc_start, cyc_elems)
        if ncyc >= 0:
            break
        cycle_capacity *= 4
        element_capacity *= 4

    cycles = [(int(cyc_min[k]), int(cyc_len[k]), int(cyc_peak[k]))
              for k in range(ncyc)]
    return ScanArrays(tail_len, cycle_id, peak, cycles)


def recurrence_flags(a, b, seeds, steps, neighborhoods, value_bound, *,
                     compiled=None):
    """Driver for the recurrence sweep.

    ``neighborhoods[i]`` is an iterable of integers for ``seeds[i]``;
    ``value_bound`` caps every orbit value the sweep will visit.
    """
    big = max((max(nb) for nb in neighborhoods if len(nb)), default=0)
    use_int64 = big <= INT64_MAX and fits_int64(a, b, value_bound)
    if compiled is None:
        compiled = NUMBA_ENABLED
    compiled = compiled and NUMBA_ENABLED and use_int64
    dtype = np.int64 if use_int64 else object

    nb_ptr = np.zeros(len(seeds) + 1, dtype=np.int64)
    flat = []
    for i, nb in enumerate(neighborhoods):
        flat.extend(sorted(nb))
        nb_ptr[i + 1] = len(flat)
    nb_idx = np.array(flat, dtype=dtype)
    seeds_arr = np.array(seeds, dtype=dtype)
    steps_arr = np.asarray(steps, dtype=np.int64)
    out = np.zeros(len(seeds), dtype=np.int64)
    if compiled:
        _recurrence_kernel(np.int64(a), np.int64(b), seeds_arr, steps_arr,
                           nb_ptr, nb_idx, out)
    else:
        python_impl(_recurrence_kernel)(a, b, seeds_arr, steps_arr,
                                        nb_ptr, nb_idx, out)
    return out.astype(bool)
