"""Seedable 64-bit generator for experiment fixtures.

Splitmix-style contract: the same seed yields the same stream on every platform.
Only integer arithmetic (masked to 64 bits) and deterministic IEEE float ops are
used, so fixtures are reproducible byte-for-byte.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1


class SplitMix64:
    """Deterministic stream of 64-bit words and derived floats."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        """Standard normal via Box-Muller (one value per pair of uniforms)."""
        u1 = (self.next_u64() >> 11) + 1  # in [1, 2^53], avoids log(0)
        u1 = u1 * (1.0 / ((1 << 53) + 1))
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        return complex(self.normal(), self.normal()) / math.sqrt(2.0)

    def normals(self, n: int) -> list[float]:
        return [self.normal() for _ in range(n)]

    def spawn(self, tag: int) -> "SplitMix64":
        """Independent substream keyed by an integer tag."""
        return SplitMix64(self.next_u64() ^ ((tag * 0xD1342543DE82EF95) & _MASK))
