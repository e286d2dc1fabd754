"""Counter-based scan-order randomization.

The solver rescans the atom index set each iteration in a fresh uniformly
random order.  The permutation for iteration ``s`` is a pure function of
``(seed, s)`` -- a SplitMix64 stream keyed by both values drives a
Fisher-Yates shuffle -- so results are reproducible without carrying RNG
state between iterations, and the compiled kernel reproduces the exact
same integer sequence.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_ITER_KEY = 0xD1B54A32D192ED03


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def scan_permutation(seed: int, iteration: int, d: int) -> np.ndarray:
    """Permutation of ``range(d)`` for the given (seed, iteration) pair."""
    if d <= 0:
        raise ValueError("d must be positive")
    state = (seed ^ ((iteration * _ITER_KEY) & _MASK)) & _MASK
    perm = np.arange(d, dtype=np.int64)
    for i in range(d - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
