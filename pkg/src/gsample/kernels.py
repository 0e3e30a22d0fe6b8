"""Compiled per-pool selection loops.

One call processes many independent pools (segments of a flat bias array),
each with its own keyed stream. The arithmetic mirrors :mod:`gsample.select`
operation for operation, so a segment's picks are bit-identical to
``select(...)`` driven by ``KeyedStream(key)``.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from .rng import nb_uniform_at
from .select import RESTART_FACTOR, STRATEGIES

_BELOW_ONE = np.nextafter(1.0, 0.0)


@nb.njit(cache=True)
def _search(F, n, r):
    lo = 0
    hi = n + 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if F[mid] <= r:
            lo = mid + 1
        else:
            hi = mid
    k = lo - 1
    if k > n - 1:
        k = n - 1
    if k < 0:
        k = 0
    return k


@nb.njit(cache=True)
def _ctps(b, start, n, F, scratch_zero, taken):
    # sequential prefix sum, matching np.cumsum
    F[0] = 0.0
    acc = 0.0
    for i in range(n):
        v = b[start + i]
        if scratch_zero and taken[i]:
            v = 0.0
        acc += v
        F[i + 1] = acc
    total = F[n]
    for i in range(n + 1):
        F[i] = F[i] / total
    F[n] = 1.0


@nb.njit(cache=True)
def select_segments(offsets, biases, ks, keys, replace, strategy, below_one):
    """Select ``ks[s]`` items from every segment ``s``.

    Returns ``(picks, retries)`` where ``picks`` holds flat indices into
    ``biases`` grouped by segment in draw order, and ``retries`` counts failed
    attempts per segment. Callers guarantee non-degenerate pools.
    """
    nseg = offsets.size - 1
    out_off = np.zeros(nseg + 1, dtype=np.int64)
    for s in range(nseg):
        out_off[s + 1] = out_off[s] + ks[s]
    picks = np.empty(out_off[nseg], dtype=np.int64)
    retries = np.zeros(nseg, dtype=np.int64)
    maxn = 0
    for s in range(nseg):
        m = offsets[s + 1] - offsets[s]
        if m > maxn:
            maxn = m
    F = np.empty(maxn + 1)
    G = np.empty(maxn + 1)
    taken = np.zeros(maxn, dtype=np.bool_)
    for s in range(nseg):
        start = offsets[s]
        n = offsets[s + 1] - start
        k = ks[s]
        base = out_off[s]
        if k == 0 or n == 0:
            continue
        if not replace and k >= n:
            for j in range(n):
                picks[base + j] = start + j
            continue
        key = keys[s]
        _ctps(biases, start, n, F, False, taken)
        counter = 0
        if replace:
            for j in range(k):
                r = nb_uniform_at(key, counter)
                counter += 1
                picks[base + j] = start + _search(F, n, r)
            continue
        for i in range(n):
            taken[i] = False
        pivot = -1
        cap = RESTART_FACTOR * n
        for j in range(k):
            attempts = 0
            while True:
                rp = nb_uniform_at(key, counter)
                counter += 1
                if strategy == 2:
                    _ctps(biases, start, n, G, True, taken)
                    idx = _search(G, n, rp)
                    break
                r = rp
                if strategy == 0 and pivot >= 0:
                    low = F[pivot]
                    delta = F[pivot + 1] - low
                    if delta >= 1.0:
                        _ctps(biases, start, n, G, True, taken)
                        idx = _search(G, n, rp)
                        break
                    lam = 1.0 / (1.0 - delta)
                    r = rp / lam
                    if r >= low:
                        r = r + delta
                    if r > below_one:
                        r = below_one
                idx = _search(F, n, r)
                if not taken[idx]:
                    break
                attempts += 1
                if attempts >= cap:
                    rp = nb_uniform_at(key, counter)
                    counter += 1
                    _ctps(biases, start, n, G, True, taken)
                    idx = _search(G, n, rp)
                    break
            retries[s] += attempts
            taken[idx] = True
            picks[base + j] = start + idx
            if pivot < 0 or biases[start + idx] > biases[start + pivot]:
                pivot = idx
    return picks, retries


@nb.njit(cache=True)
def build_row_tables(row_offsets, biases):
    """Normalized cumulative table of every row, row ``v`` at ``row_offsets[v] + v``.

    Rows with zero total mass hold NaN and must not be searched.
    Also returns the count of positive-bias entries per row.
    """
    nv = row_offsets.size - 1
    table = np.empty(row_offsets[nv] + nv)
    positive = np.zeros(nv, dtype=np.int64)
    taken = np.zeros(0, dtype=np.bool_)
    for v in range(nv):
        start = row_offsets[v]
        n = row_offsets[v + 1] - start
        if n == 0:
            table[start + v] = 0.0
            continue
        for i in range(n):
            if biases[start + i] > 0.0:
                positive[v] += 1
        if positive[v] == 0:
            for i in range(n + 1):
                table[start + v + i] = np.nan
            continue
        _ctps(biases, start, n, table[start + v:start + v + n + 1], False, taken)
    return table, positive


@nb.njit(cache=True)
def draw_from_tables(table, table_off, lens, ks, keys):
    """With-replacement draws against precomputed row tables.

    Same stream consumption and search as the ``replace`` branch of
    :func:`select_segments`; returns row-local indices grouped by segment.
    """
    nseg = lens.size
    total = 0
    for s in range(nseg):
        total += ks[s]
    picks = np.empty(total, dtype=np.int64)
    j = 0
    for s in range(nseg):
        n = lens[s]
        F = table[table_off[s]:table_off[s] + n + 1]
        for c in range(ks[s]):
            picks[j] = _search(F, n, nb_uniform_at(keys[s], c))
            j += 1
    return picks


def run_select_segments(offsets, biases, ks, keys, replace: bool, strategy: str = "brs"):
    return select_segments(
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(biases, dtype=np.float64),
        np.ascontiguousarray(ks, dtype=np.int64),
        np.ascontiguousarray(keys, dtype=np.uint64),
        bool(replace),
        STRATEGIES.index(strategy),
        _BELOW_ONE,
    )
