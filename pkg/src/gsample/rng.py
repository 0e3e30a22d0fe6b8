"""Counter-based keyed random streams.

Every draw is a pure function of ``(master_seed, instance, depth, slot, counter)``
so results do not depend on scheduling order or worker count. The mixing
function is the SplitMix64 finalizer; a stream keyed by ``k`` yields
``mix(k + (i + 1) * GOLDEN)`` for its ``i``-th draw, i.e. SplitMix64 seeded at ``k``.
"""

from __future__ import annotations

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_K_INST = np.uint64(0xD6E8FEB86659FD93)
_K_DEPTH = np.uint64(0xA0761D6478BD642F)
_K_SLOT = np.uint64(0xE7037ED1A0B428DB)
_INV53 = 1.0 / 9007199254740992.0


def _u64(x) -> np.ndarray:
    if isinstance(x, (int, np.integer)):
        return np.asarray(int(x) & MASK64, dtype=np.uint64)
    return np.asarray(x).astype(np.int64).astype(np.uint64)


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, instance, depth, slot) -> np.ndarray:
    """Vectorized key derivation; arguments broadcast against each other."""
    with np.errstate(over="ignore"):
        h = mix64(_u64(seed) + GOLDEN)
        h = mix64(h + _u64(instance) * _K_INST)
        h = mix64(h + _u64(depth) * _K_DEPTH)
        return mix64(h + _u64(slot) * _K_SLOT)


def uniform_at(key, counter) -> np.ndarray:
    """The ``counter``-th uniform double in [0, 1) of the stream ``key``."""
    with np.errstate(over="ignore"):
        z = mix64(np.asarray(key, dtype=np.uint64) + (_u64(counter) + np.uint64(1)) * GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


class KeyedStream:
    """Sequential view over one keyed stream; ``random()`` advances a counter."""

    def __init__(self, key, counter: int = 0):
        self.key = np.uint64(np.asarray(key, dtype=np.uint64))
        self.counter = counter

    def random(self, size: int | None = None):
        if size is None:
            out = float(uniform_at(self.key, self.counter))
            self.counter += 1
            return out
        out = uniform_at(self.key, np.arange(self.counter, self.counter + size))
        self.counter += size
        return out

    def child(self, index: int) -> "KeyedStream":
        """An independent stream derived from this key (used by concurrent draws)."""
        with np.errstate(over="ignore"):
            return KeyedStream(mix64(self.key ^ mix64(_u64(index) + GOLDEN)))

    def __repr__(self):
        return f"KeyedStream(key={int(self.key):#018x}, counter={self.counter})"


def instance_rng(master_seed: int, instance: int, depth: int, slot: int) -> KeyedStream:
    return KeyedStream(stream_key(master_seed, instance, depth, slot))


@nb.njit(cache=True, inline="always")
def nb_mix64(z):
    z = (z ^ (z >> nb.uint64(30))) * nb.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> nb.uint64(27))) * nb.uint64(0x94D049BB133111EB)
    return z ^ (z >> nb.uint64(31))


@nb.njit(cache=True, inline="always")
def nb_uniform_at(key, counter):
    z = nb_mix64(key + (nb.uint64(counter) + nb.uint64(1)) * nb.uint64(0x9E3779B97F4A7C15))
    return nb.float64(z >> nb.uint64(11)) * (1.0 / 9007199254740992.0)
