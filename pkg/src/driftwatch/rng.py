"""Fully specified 64-bit RNG for cross-platform reproducible streams.

A splitmix64 stage expands one 64-bit seed into the 256-bit state of a
xoshiro256** generator.  Both algorithms use the published reference
constants, so a stream generated from a given seed replays identically
in any language that implements the same two primitives.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
_SPLITMIX_MUL2 = 0x94D049BB133111EB


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """splitmix64; used only for seeding and seed derivation."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _SPLITMIX_GAMMA) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _SPLITMIX_MUL1) & MASK64
        z = ((z ^ (z >> 27)) * _SPLITMIX_MUL2) & MASK64
        return z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** seeded through splitmix64.

    `random()` uses the top 53 bits, giving uniform floats in [0, 1).
    `randrange(n)` reduces by modulo; the bias is below 2**-40 for any
    n that occurs here and the reduction is trivially portable.
    """

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        return self.next_u64() % n

    def choice(self, seq):
        if not seq:
            raise ValueError("choice() on empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.randrange(i + 1)
            xs[i], xs[j] = xs[j], xs[i]


def derive_seed(seed: int, *salts: int) -> int:
    """Deterministically derive a child seed from a base seed and salts.

    Each salt is xor-folded into the state and passed through one
    splitmix64 step, so (seed, salts) -> child is stable across runs.
    """
    x = seed & MASK64
    for salt in salts:
        x = SplitMix64(x ^ (salt & MASK64)).next_u64()
    return x
