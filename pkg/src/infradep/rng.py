"""Counter-based 64-bit random streams for reproducible simulation.

The generator is splitmix64: state advances by the 64-bit golden-ratio
increment and each output is the avalanche mix of the state.  Everything
here is integer arithmetic mod 2^64, so traces are bit-exact across
platforms and Python builds.  The constants below are the documented
contract; see README ("Reproducibility") before touching them.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """Avalanche finalizer of splitmix64."""
    x &= MASK64
    x ^= x >> 30
    x = (x * MIX_A) & MASK64
    x ^= x >> 27
    x = (x * MIX_B) & MASK64
    x ^= x >> 31
    return x


def stream_seed(seed: int, replication: int) -> int:
    """Derive the independent stream seed for one replication.

    stream_seed(s, r) = mix64(s XOR mix64(r XOR GOLDEN)); the inner mix
    decorrelates consecutive replication indices, the outer one
    decorrelates user seeds.
    """
    return mix64((seed & MASK64) ^ mix64((replication & MASK64) ^ GOLDEN))


class SplitMix64:
    """Sequential view of the splitmix64 counter stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * 2.0**-53

    def exponential(self, rate: float) -> float:
        """Inverse-transform exponential sample with the given rate."""
        return -math.log(self.uniform()) / rate
