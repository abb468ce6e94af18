"""Counter-based pseudo-random streams.

Every consumer of randomness in this package derives an independent stream
from a (seed, index) pair, so results never depend on how work is split
across workers or on call order.  The generator is SplitMix64: the state
walks an arithmetic progression and each output is a strong 64-bit mix of
the state.  That is plenty for Monte Carlo use and it is trivially
reproducible across platforms.

The jitted helpers are written in pure uint64 arithmetic.  Mixing signed and
unsigned integers silently promotes to float under numba, so every cast is
explicit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U64 = np.uint64

GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX_A = _U64(0xBF58476D1CE4E5B9)
_MIX_B = _U64(0x94D049BB133111EB)
_UNIT = 1.0 / 9007199254740992.0  # 2 ** -53


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _U64(30))) * _MIX_A
    z = (z ^ (z >> _U64(27))) * _MIX_B
    return z ^ (z >> _U64(31))


@njit(cache=True, inline="always")
def stream_init(seed, index):
    """Initial state of the substream `index` of the master seed."""
    return mix64((_U64(seed) + GOLDEN) ^ (_U64(index) * _MIX_A + GOLDEN))


@njit(cache=True, inline="always")
def next_u64(state):
    state = state + GOLDEN
    return state, mix64(state)


@njit(cache=True, inline="always")
def next_unit(state):
    """Uniform double in [0, 1) from the top 53 bits."""
    state, x = next_u64(state)
    return state, (x >> _U64(11)) * _UNIT


@njit(cache=True)
def next_below(state, bound):
    """Uniform integer in [0, bound) by bit-mask rejection (exactly uniform)."""
    mask = _U64(1)
    top = _U64(bound - 1)
    while mask < top:
        mask = (mask << _U64(1)) | _U64(1)
    while True:
        state, x = next_u64(state)
        r = x & mask
        if r < _U64(bound):
            return state, np.int64(r)


@njit(cache=True)
def fill_permutation(state, out):
    """Fisher-Yates shuffle of the values 1..n into `out`; returns the new state."""
    n = out.shape[0]
    for v in range(n):
        out[v] = v + 1
    for v in range(n - 1, 0, -1):
        state, r = next_below(state, v + 1)
        tmp = out[v]
        out[v] = out[r]
        out[r] = tmp
    return state


class CounterRng:
    """Python-side view of one substream, for light (non-batch) drawing.

    Heavy samplers stay inside jitted kernels and derive their own per-sample
    streams from the same (seed, index) scheme; this class exists for the
    one-draw-at-a-time API surface and for tests.
    """

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        # jitted calls unbox uint64 results to plain ints; the state must be
        # re-wrapped before every call or numba would compile a signed-integer
        # specialization with a different stream
        self._state = _U64(stream_init(_U64(self.seed % (1 << 64)),
                                       _U64(self.index % (1 << 64))))

    def uniform(self) -> float:
        state, u = next_unit(self._state)
        self._state = _U64(state)
        return float(u)

    def below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        state, r = next_below(self._state, np.int64(bound))
        self._state = _U64(state)
        return int(r)

    def spawn(self, index: int) -> "CounterRng":
        """Independent child stream; children with distinct indices never collide."""
        return CounterRng(self.seed, index)

    @property
    def state(self) -> np.uint64:
        return _U64(self._state)

    @state.setter
    def state(self, value):
        self._state = _U64(value)
