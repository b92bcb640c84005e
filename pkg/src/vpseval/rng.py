"""Deterministic pseudo-random numbers for the synthetic generator.

The generator is SplitMix64 used in counter mode: draw ``i`` (0-based) is

    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output_i = z ^ (z >> 31)

Because each output depends only on (seed, i), blocks of draws can be
produced with vectorized numpy arithmetic while scalar helpers consume the
same stream, and any implementation of SplitMix64 in any language
reproduces the sequence bit for bit.

Derived draws are fixed too:

* ``randint(n)`` maps one raw draw u to ``(u * n) >> 64`` (multiply-high).
* ``uniform()`` maps one raw draw to ``(u >> 11) / 2**53``.
* ``bernoulli_block(n, p)`` compares n raw draws against
  ``floor(p * 2**64)``.

Every consumer documents how many draws it takes so streams stay aligned.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Counter-mode SplitMix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._counter = 0

    @property
    def counter(self) -> int:
        """Number of raw 64-bit draws consumed so far."""
        return self._counter

    def next_u64(self) -> int:
        z = (self._seed + (self._counter + 1) * _GOLDEN) & _MASK64
        self._counter += 1
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def block_u64(self, n: int) -> np.ndarray:
        """The next ``n`` raw draws as a uint64 array, vectorized."""
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        z = np.uint64(self._seed) + idx * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def randint(self, n: int) -> int:
        """One draw mapped uniformly onto [0, n). One raw draw consumed."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        return (self.next_u64() * n) >> 64

    def uniform(self) -> float:
        """One draw mapped onto [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def choice(self, items):
        """Pick one element; consumes one raw draw."""
        seq = list(items)
        return seq[self.randint(len(seq))]

    def bernoulli_block(self, n: int, p: float) -> np.ndarray:
        """Boolean array of ``n`` independent trials with success rate p.

        Consumes exactly ``n`` raw draws regardless of outcomes, so callers
        that mask the result keep the stream position content-independent.
        """
        if not 0.0 <= p <= 1.0:
            raise ValueError("probability out of [0, 1]")
        threshold = min(int(p * 2.0**64), 1 << 64)
        if threshold >= 1 << 64:
            self._counter += n
            return np.ones(n, dtype=bool)
        return self.block_u64(n) < np.uint64(threshold)
