"""Portable, seedable random number generation.

Every stochastic choice in this package (class splits, sample splits,
synthetic packs) flows through :class:`PortableRng` so that results are
reproducible bit-for-bit from a single 64-bit seed, independent of
platform and of any third-party RNG's stream guarantees.

Algorithm: the SplitMix64 finalizer applied to a seeded 64-bit counter,

    value(i) = mix64((seed + GOLDEN * (i + 1)) mod 2**64)

where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the xor-shift-multiply
finalizer from SplitMix64. Each value depends only on (seed, i), so the
stream can be produced sequentially or in bulk with identical results.
Independent streams occupy disjoint counter blocks of 2**40 draws.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STREAM_BLOCK = 1 << 40
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def _mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int (mod 2**64)."""
    z = (z ^ (z >> 30)) * _MIX1 & _MASK
    z = (z ^ (z >> 27)) * _MIX2 & _MASK
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer vectorized over a uint64 array."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class PortableRng:
    """Counter-based SplitMix64 stream.

    Draw order matters: every method consumes a documented number of
    counters, so a sequence of calls is reproducible from (seed, stream).
    """

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed < 1 << 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0 <= stream < 1 << 23:
            raise ValueError("stream out of range")
        self._seed = seed
        self._pos = stream * _STREAM_BLOCK

    def next_u64(self) -> int:
        """One 64-bit draw, consuming one counter."""
        self._pos += 1
        return _mix64((self._seed + _GOLDEN * self._pos) & _MASK)

    def raw(self, count: int) -> np.ndarray:
        """`count` 64-bit draws as a uint64 array, consuming `count` counters."""
        counters = np.arange(self._pos + 1, self._pos + count + 1, dtype=np.uint64)
        self._pos += count
        values = np.uint64(self._seed) + np.uint64(_GOLDEN) * counters
        return _mix64_array(values)

    def uniforms(self, count: int) -> np.ndarray:
        """`count` float64 values uniform on [0, 1), one counter each."""
        return (self.raw(count) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normals via the Box-Muller cosine branch.

        Consumes exactly 2 * count counters (two uniforms per normal).
        """
        u = self.uniforms(2 * count)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        return radius * np.cos(_TWO_PI * u[1::2])

    def randbelow(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def permutation(self, count: int) -> np.ndarray:
        """Fisher-Yates permutation of arange(count)."""
        order = np.arange(count, dtype=np.int64)
        for i in range(count - 1, 0, -1):
            j = self.randbelow(i + 1)
            order[i], order[j] = order[j], order[i]
        return order
