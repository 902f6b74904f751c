"""Counter-based splitmix64 stream shared by both sampling backends.

The state after n draws is ``seed + n * GAMMA (mod 2**64)``, so the same
stream can be produced one value at a time (compiled sweep loop) or as a
vectorized block (pure-Python sweep loop) and stay bit-identical.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53


def seed_state(seed: int) -> int:
    """Initial stream state for an integer seed."""
    return seed & MASK


def next_double(state: int) -> tuple[float, int]:
    """Draw one double in [0, 1) and return it with the advanced state."""
    state = (state + GAMMA) & MASK
    z = state
    z = ((z ^ (z >> 30)) * _MIX1) & MASK
    z = ((z ^ (z >> 27)) * _MIX2) & MASK
    z = z ^ (z >> 31)
    return (z >> 11) * _INV_2_53, state


def doubles(state: int, n: int) -> tuple[np.ndarray, int]:
    """Draw ``n`` doubles in [0, 1) as one vectorized block.

    Equivalent to ``n`` successive :func:`next_double` calls.
    """
    if n == 0:
        return np.empty(0, dtype=np.float64), state
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(state) + idx * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    out = (z >> np.uint64(11)).astype(np.float64) * _INV_2_53
    return out, (state + n * GAMMA) & MASK
