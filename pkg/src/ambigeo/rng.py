"""Self-contained 64-bit PRNG used wherever a seed is part of a contract.

The generator is xoshiro256** (Blackman & Vigna) with its four 64-bit
state words filled from a splitmix64 stream of the user seed.  This is the
generator behind ``nbayes.split_half`` and the per-word seed derivation in
``synthkit``; pinning it here keeps seeded results identical across
platforms and numpy versions.  See README section "Seeding and
determinism" for the exact state-initialisation rule.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold any number of integers into one 64-bit seed.

    Each part is absorbed into a running splitmix64 stream, so
    ``mix_seed(a, b)`` and ``mix_seed(b, a)`` differ; used to derive
    independent per-word substreams from (experiment seed, condition
    index, word index).
    """
    state = 0x8818F2EC698AC5D5
    for part in parts:
        state, out = splitmix64((state ^ (part & _MASK64)) & _MASK64)
        state ^= out
    _, out = splitmix64(state)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded via splitmix64, after the reference C code."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        self._s = []
        for _ in range(4):
            state, word = splitmix64(state)
            self._s.append(word)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (_MASK64 + 1) - ((_MASK64 + 1) % bound)
        while True:
            value = self.next_u64()
            if value < threshold:
                return value % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
