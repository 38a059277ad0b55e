"""Deterministic 64-bit linear congruential generator.

Constants are Knuth's MMIX parameters:

    state <- 6364136223846793005 * state + 1442695040888963407  (mod 2^64)

with doubles extracted as (state >> 11) / 2^53, i.e. uniform in [0, 1).
Chosen over a library RNG so the sampled verification points are
bit-reproducible from the documented recurrence alone, in any language.
"""

from __future__ import annotations

_A = 6364136223846793005
_C = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_uint(self) -> int:
        self.state = (_A * self.state + _C) & _MASK
        return self.state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_uint() >> 11) / float(1 << 53)
        return lo + u * (hi - lo)
