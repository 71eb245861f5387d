"""SplitMix64: a small splittable 64-bit generator with fixed constants.

Streams are reproducible bit-for-bit from the seed, which keeps theorem
reports comparable across runs and machines.
"""

from __future__ import annotations

ALGORITHM = "splitmix64"
MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    @classmethod
    def derive(cls, seed: int, index: int) -> "SplitMix64":
        """Independent stream number ``index`` of master ``seed``."""
        return cls(stream_seed(seed, index))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK
        return mix64(self.state)

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``, without modulo bias."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def chance(self, p: float) -> bool:
        return self.random() < p

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def subset(self, items, p: float = 0.5) -> list:
        return [x for x in items if self.chance(p)]


def stream_seed(seed: int, index: int) -> int:
    return mix64((seed + (index + 1) * GOLDEN_GAMMA) & MASK)
