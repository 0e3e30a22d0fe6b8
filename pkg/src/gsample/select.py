"""Weighted selection over a candidate pool by inverse transform sampling.

Candidates own half-open regions ``[F[k], F[k+1])`` of the cumulative
transition probability space (CTPS). Without-replacement draws resolve
collisions by bipartite region search: the random number is remapped around
an already-taken region so the CTPS never has to be rebuilt.
"""

from __future__ import annotations

import math
import threading
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

WITH = "with"
WITHOUT = "without"
STRATEGIES = ("brs", "repeated", "updated")
RESTART_FACTOR = 64
_BELOW_ONE = math.nextafter(1.0, 0.0)


class DegeneratePoolError(ValueError):
    """Every remaining candidate has zero bias."""


class ExhaustedPoolError(RuntimeError):
    """No unselected candidate is left."""


@dataclass(frozen=True, eq=False)
class Ctps:
    biases: np.ndarray
    prefix: np.ndarray
    cumulative: np.ndarray

    @property
    def n(self) -> int:
        return self.biases.size

    def region(self, k: int) -> tuple[float, float]:
        return float(self.cumulative[k]), float(self.cumulative[k + 1])


def _validate_biases(biases) -> np.ndarray:
    b = np.asarray(biases, dtype=np.float64).ravel()
    if b.size == 0:
        raise DegeneratePoolError("empty candidate pool")
    if not np.all(np.isfinite(b)) or np.any(b < 0):
        raise ValueError("biases must be finite and non-negative")
    return b


def build_ctps(biases) -> Ctps:
    """Prefix sums S (S[0] = 0) and their normalization F, with F[n] clamped to 1."""
    b = _validate_biases(biases)
    prefix = np.empty(b.size + 1)
    prefix[0] = 0.0
    np.cumsum(b, out=prefix[1:])
    total = prefix[-1]
    if total <= 0.0:
        raise DegeneratePoolError("all candidate biases are zero")
    cumulative = prefix / total
    cumulative[-1] = 1.0
    for arr in (b, prefix, cumulative):
        arr.flags.writeable = False
    return Ctps(b, prefix, cumulative)


def its_select(c: Ctps, r):
    """Index k (0-based) with ``F[k] <= r < F[k+1]``; ``r`` may be an array."""
    r_arr = np.asarray(r, dtype=np.float64)
    if np.any(~((r_arr >= 0.0) & (r_arr < 1.0))):
        raise ValueError(f"r={r} outside [0, 1)")
    k = np.clip(np.searchsorted(c.cumulative, r_arr, side="right") - 1, 0, c.n - 1)
    return int(k) if k.ndim == 0 else k


class SelectionBitmap:
    """Strided bitmap over 8-bit words.

    Candidate ``i`` maps to word ``(i % stride) + stride * (i // (8 * stride))``
    and bit ``(i // stride) % 8``, so neighbouring candidates land in different
    words. ``test_and_set`` is atomic per word.
    """

    def __init__(self, n: int, stride: int | None = None):
        if n < 0:
            raise ValueError("n must be non-negative")
        if stride is None:
            stride = max(1, min(32, -(-n // 8)))
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.n = n
        self.stride = stride
        blocks = max(1, -(-n // (8 * stride)))
        self.cells = bytearray(blocks * stride)
        self._locks = [threading.Lock() for _ in range(len(self.cells))]

    def location(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.n:
            raise IndexError(f"candidate {i} out of range [0, {self.n})")
        s = self.stride
        return (i % s) + s * (i // (8 * s)), (i // s) % 8

    def test_and_set(self, i: int) -> bool:
        word, bit = self.location(i)
        mask = 1 << bit
        with self._locks[word]:
            was = bool(self.cells[word] & mask)
            self.cells[word] |= mask
        return was

    def is_set(self, i: int) -> bool:
        word, bit = self.location(i)
        return bool(self.cells[word] & (1 << bit))

    def count(self) -> int:
        return sum(bin(c).count("1") for c in self.cells)

    def taken(self) -> list[int]:
        return [i for i in range(self.n) if self.is_set(i)]


def _taken_set(taken) -> set[int]:
    if isinstance(taken, SelectionBitmap):
        return set(taken.taken())
    return {int(t) for t in taken}


def updated_sampling_oracle(biases, taken, r):
    """Reference: zero the taken biases, rebuild the CTPS, search ``r`` (scalar or array)."""
    b = np.array(_validate_biases(biases))
    t = _taken_set(taken)
    if len(t) >= b.size and all(0 <= i < b.size for i in t):
        raise ExhaustedPoolError("every candidate is taken")
    for i in t:
        b[i] = 0.0
    return its_select(build_ctps(b), r)


def brs_remap(c: Ctps, pivot: int, r_prime):
    """Map ``r_prime`` (scalar or array) into the CTPS with the pivot's region cut out."""
    low, high = c.region(pivot)
    delta = high - low
    lam = 1.0 / (1.0 - delta)
    r = np.asarray(r_prime, dtype=np.float64) / lam
    r = np.minimum(np.where(r >= low, r + delta, r), _BELOW_ONE)
    return float(r) if r.ndim == 0 else r


def heaviest_taken(c: Ctps, taken) -> int | None:
    best = None
    for i in sorted(_taken_set(taken)):
        if best is None or c.biases[i] > c.biases[best]:
            best = i
    return best


def _check_selectable(c: Ctps, is_taken) -> None:
    free = [i for i in range(c.n) if not is_taken(i)]
    if not free:
        raise ExhaustedPoolError("every candidate is taken")
    if not any(c.biases[i] > 0 for i in free):
        raise DegeneratePoolError("all unselected candidates have zero bias")


def bipartite_region_search(c: Ctps, taken: SelectionBitmap, rng, pivot: int | None = None) -> tuple[int, int]:
    """Draw one unselected candidate; returns ``(index, restarts)``.

    Each attempt draws ``r'`` and, once anything is taken, remaps it around
    the pivot region ``(l, h)``: ``r = r' / lambda`` with
    ``lambda = 1 / (1 - (h - l))``; if ``r >= l`` it is shifted by
    ``delta = h - l`` into ``(h, 1)``. Landing on another taken region
    restarts with a fresh draw. The pivot defaults to the heaviest taken
    candidate; with a single taken candidate the result equals
    :func:`updated_sampling_oracle` for the same ``r'`` (up to rounding for
    ``r'`` within a few ulps of a region boundary).
    """
    is_taken = taken.is_set
    _check_selectable(c, is_taken)
    if pivot is None:
        pivot = heaviest_taken(c, taken)
    elif not is_taken(pivot):
        raise ValueError("pivot must be a taken candidate")
    restarts = 0
    cap = RESTART_FACTOR * c.n
    while True:
        r_prime = rng.random()
        if pivot is not None and c.cumulative[pivot + 1] - c.cumulative[pivot] >= 1.0:
            # survivors vanish at double precision; only a rebuilt CTPS can reach them
            return updated_sampling_oracle(c.biases, taken, r_prime), restarts
        r = r_prime if pivot is None else brs_remap(c, pivot, r_prime)
        k = its_select(c, r)
        if not is_taken(k):
            return k, restarts
        restarts += 1
        if restarts >= cap:
            return updated_sampling_oracle(c.biases, taken, rng.random()), restarts


def repeated_sampling(c: Ctps, taken: SelectionBitmap, rng) -> tuple[int, int]:
    """Baseline: redraw on the unchanged CTPS until an unselected candidate is hit."""
    _check_selectable(c, taken.is_set)
    restarts = 0
    cap = RESTART_FACTOR * c.n
    while True:
        k = its_select(c, rng.random())
        if not taken.is_set(k):
            return k, restarts
        restarts += 1
        if restarts >= cap:
            return updated_sampling_oracle(c.biases, taken, rng.random()), restarts


@dataclass
class SelectionResult:
    chosen: list[int] = field(default_factory=list)
    retries: int = 0


def select(
    pool_size: int,
    k: int,
    bias_of: Callable[[int], float] | Sequence[float] | np.ndarray,
    rng,
    mode: str = WITHOUT,
    strategy: str = "brs",
    workers: int = 1,
) -> SelectionResult:
    """Pick ``k`` candidates out of ``pool_size`` proportionally to their bias.

    ``mode="with"`` draws independently (random-walk semantics).
    ``mode="without"`` returns distinct indices, resolving collisions with
    ``strategy`` (``"brs"``, ``"repeated"`` or ``"updated"``). When ``workers``
    is above one the draws run on threads sharing one bitmap; the result is
    a valid distinct set but its order depends on the interleaving.
    """
    if mode not in (WITH, WITHOUT):
        raise ValueError(f"unknown mode {mode!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if k < 0:
        raise ValueError("k must be non-negative")
    if mode == WITHOUT and k > pool_size:
        raise ValueError(f"cannot pick {k} distinct out of {pool_size}")
    if k == 0:
        return SelectionResult()
    if mode == WITHOUT and k == pool_size:
        return SelectionResult(list(range(pool_size)), 0)
    if callable(bias_of):
        biases = [bias_of(i) for i in range(pool_size)]
    else:
        biases = bias_of
        if len(biases) != pool_size:
            raise ValueError("bias sequence length differs from pool_size")
    c = build_ctps(biases)
    if mode == WITH:
        return SelectionResult([its_select(c, rng.random()) for _ in range(k)], 0)
    if np.count_nonzero(c.biases) < k:
        raise DegeneratePoolError(f"fewer than {k} candidates have positive bias")
    if workers > 1:
        return _select_concurrent(c, k, rng, strategy, workers)

    bitmap = SelectionBitmap(pool_size)
    result = SelectionResult()
    pivot = None
    for _ in range(k):
        if strategy == "brs":
            idx, retries = bipartite_region_search(c, bitmap, rng, pivot)
        elif strategy == "repeated":
            idx, retries = repeated_sampling(c, bitmap, rng)
        else:
            idx, retries = updated_sampling_oracle(c.biases, bitmap, rng.random()), 0
        bitmap.test_and_set(idx)
        result.chosen.append(idx)
        result.retries += retries
        if pivot is None or c.biases[idx] > c.biases[pivot]:
            pivot = idx
    return result


def _select_concurrent(c: Ctps, k: int, rng, strategy: str, workers: int) -> SelectionResult:
    from concurrent.futures import ThreadPoolExecutor

    bitmap = SelectionBitmap(c.n)
    lock = threading.Lock()
    result = SelectionResult()

    def one(j: int) -> None:
        stream = rng.child(j)
        retries = 0
        while True:
            if strategy == "repeated":
                idx, extra = repeated_sampling(c, bitmap, stream)
            elif strategy == "updated":
                idx, extra = updated_sampling_oracle(c.biases, bitmap, stream.random()), 0
            else:
                idx, extra = bipartite_region_search(c, bitmap, stream)
            retries += extra
            if not bitmap.test_and_set(idx):
                break
            retries += 1  # lost the race for this bit
        with lock:
            result.chosen.append(idx)
            result.retries += retries

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(one, range(k)))
    return result
