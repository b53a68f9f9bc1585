"""46-bit multiplicative congruential random stream.

The generator is state' = a * state mod 2**46 with a = 5**13 and an odd
seed, the sequence both kernels draw from. A deviate is state' * 2**-46,
so every value lies strictly inside (0, 1).

Scalar stepping uses exact Python integers. Bulk generation is vectorised:
a table of multiplier powers a^1..a^B mod 2**46 turns a block of B
successive states into one elementwise product with the current state.
Products of two 46-bit values need 92 bits, so operands are split into
23-bit halves and recombined in uint64, which is exact throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import LCG_MODULUS, LCG_MULTIPLIER

_MASK46 = LCG_MODULUS - 1
_MASK23 = (1 << 23) - 1
_SCALE = 2.0 ** -46

_POWER_BLOCK = 1 << 16
_powers_hi: np.ndarray | None = None
_powers_lo: np.ndarray | None = None


@dataclass(frozen=True)
class RandomStream:
    """Immutable stream position: `state` is the value at `position` steps."""

    state: int
    position: int = 0
    multiplier: int = LCG_MULTIPLIER

    def __post_init__(self) -> None:
        if not (0 < self.state < LCG_MODULUS):
            raise ValueError(f"stream state must be in (0, 2**46): {self.state}")
        if self.state % 2 == 0:
            raise ValueError("stream state must be odd")
        if self.position < 0:
            raise ValueError("stream position must be nonnegative")


def lcg_next(stream: RandomStream) -> tuple[float, RandomStream]:
    """Advance one step; returns the deviate in (0, 1) and the new stream."""
    state = (stream.multiplier * stream.state) & _MASK46
    return state * _SCALE, RandomStream(state, stream.position + 1, stream.multiplier)


def lcg_skip(seed: int, k: int) -> RandomStream:
    """Stream positioned k steps past `seed`, via modular exponentiation.

    Runs in O(log k); equivalent to k applications of lcg_next's state step.
    """
    if seed <= 0 or seed % 2 == 0:
        raise ValueError(f"seed must be a positive odd integer: {seed}")
    if k < 0:
        raise ValueError(f"skip count must be nonnegative: {k}")
    state = (seed * pow(LCG_MULTIPLIER, k, LCG_MODULUS)) & _MASK46
    return RandomStream(state, k)


def _power_tables() -> tuple[np.ndarray, np.ndarray]:
    # a^1..a^B mod 2**46, split into 23-bit halves. Built once, ~1 MiB.
    global _powers_hi, _powers_lo
    if _powers_hi is None:
        powers = np.empty(_POWER_BLOCK, dtype=np.uint64)
        acc = 1
        for i in range(_POWER_BLOCK):
            acc = (acc * LCG_MULTIPLIER) & _MASK46
            powers[i] = acc
        _powers_hi = powers >> np.uint64(23)
        _powers_lo = powers & np.uint64(_MASK23)
    return _powers_hi, _powers_lo


def draw_block(stream: RandomStream, count: int) -> tuple[np.ndarray, RandomStream]:
    """Draw `count` successive deviates as a float64 array.

    Bit-identical to `count` calls of lcg_next; states stay below 2**46 so
    the float64 conversion is exact.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if stream.multiplier != LCG_MULTIPLIER:
        # Power tables assume the default multiplier; step scalar instead.
        out = np.empty(count, dtype=np.float64)
        for i in range(count):
            out[i], stream = lcg_next(stream)
        return out, stream
    hi, lo = _power_tables()
    out = np.empty(count, dtype=np.float64)
    state = stream.state
    filled = 0
    while filled < count:
        take = min(_POWER_BLOCK, count - filled)
        s_hi = np.uint64(state >> 23)
        s_lo = np.uint64(state & _MASK23)
        mid = hi[:take] * s_lo + lo[:take] * s_hi
        states = (((mid & np.uint64(_MASK23)) << np.uint64(23)) + lo[:take] * s_lo) & np.uint64(_MASK46)
        out[filled:filled + take] = states * _SCALE
        state = int(states[take - 1])
        filled += take
    return out, RandomStream(state, stream.position + count, stream.multiplier)
