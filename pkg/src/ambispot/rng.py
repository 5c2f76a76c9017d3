"""Portable seeded random numbers.

The generator is SplitMix64 (Steele, Lea & Flood 2014), chosen because the
whole algorithm fits in a few lines and can be reproduced bit-for-bit in any
language:

    state  <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z      <- state
    z      <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z      <- (z xor (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output <- z xor (z >> 31)

Derived streams:

* ``uniform()``  = (output >> 11) * 2**-53, in [0, 1)
* ``below(n)``   = floor(uniform() * n)
* ``normal()``   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), two uniforms per
  draw, the sine partner is discarded
* ``shuffle(xs)``: Fisher-Yates from the back, ``j = below(i + 1)``
* ``derive_seed(master, i)`` = mix64(master xor i), where ``mix64`` is one
  SplitMix64 step applied to a fresh state equal to its argument.
"""

from __future__ import annotations

import math
from typing import MutableSequence, Sequence, TypeVar

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def mix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    return mix64((master ^ index) & MASK64)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        out = mix64(self.state)
        self.state = (self.state + GOLDEN) & MASK64
        return out

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return min(n - 1, int(self.uniform() * n))

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def choice(self, xs: Sequence[T]) -> T:
        return xs[self.below(len(xs))]

    def shuffle(self, xs: MutableSequence) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def sample(self, xs: Sequence[T], k: int) -> list[T]:
        """``k`` distinct elements, without replacement (partial Fisher-Yates)."""
        pool = list(xs)
        if k > len(pool):
            raise ValueError(f"cannot sample {k} from {len(pool)}")
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
