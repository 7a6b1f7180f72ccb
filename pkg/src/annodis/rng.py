"""Deterministic cross-platform PRNG used for every random choice in the package.

The generator is SplitMix64 (Steele, Lea & Flood's 64-bit finalizer stream).
It is trivially portable: 64-bit integer arithmetic only, no floats in the
state transition, so the same seed yields the same sequence on every
platform and Python build.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


class SplitMix64:
    """64-bit state PRNG. One instance per independent random stream."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = MASK64 - (MASK64 + 1) % n
        while True:
            r = self.next_u64()
            if r <= limit:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices drawn uniformly from range(n), in draw order."""
        if k > n:
            raise ValueError("k exceeds population size")
        pool = list(range(n))
        picks = []
        for _ in range(k):
            j = self.randbelow(len(pool))
            picks.append(pool.pop(j))
        return picks

    def coin(self) -> bool:
        return bool(self.next_u64() & 1)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
