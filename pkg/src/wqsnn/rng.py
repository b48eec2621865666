"""Xorshift random streams.

Two flavours share one generator: :class:`Xorshift64` is a scalar stream,
:class:`XorshiftLanes` advances many independent streams at once (one per
construction job or per neuron) so that results never depend on how work is
partitioned.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_M53 = 1.0 / (1 << 53)


def splitmix64(x: int) -> int:
    """One round of splitmix64; used to derive well-mixed seeds."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    z = np.asarray(x, dtype=np.uint64) + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_seeds(master: int, count: int, salt: int = 0) -> np.ndarray:
    """Independent non-zero 64-bit states for ``count`` streams."""
    base = splitmix64((master ^ splitmix64(salt)) & _MASK64)
    with np.errstate(over="ignore"):
        idx = np.arange(count, dtype=np.uint64) * np.uint64(_GOLDEN)
        seeds = splitmix64_array(idx ^ np.uint64(base))
    seeds[seeds == 0] = np.uint64(_GOLDEN)
    return seeds


class Xorshift64:
    """Marsaglia's xorshift64 (shift triple 13, 7, 17)."""

    def __init__(self, seed: int):
        state = splitmix64(seed & _MASK64)
        self.state = state or _GOLDEN

    @classmethod
    def from_state(cls, state: int) -> "Xorshift64":
        """Stream continuing from a raw state, e.g. one lane of :class:`XorshiftLanes`."""
        if not state:
            raise ValueError("xorshift state must be non-zero")
        gen = cls.__new__(cls)
        gen.state = int(state) & _MASK64
        return gen

    def next_u64(self) -> int:
        x = self.state
        x ^= (x << 13) & _MASK64
        x ^= x >> 7
        x ^= (x << 17) & _MASK64
        self.state = x
        return x

    def uniform(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * _TWO_M53


class XorshiftLanes:
    """A vector of independent xorshift64 states advanced in lockstep."""

    def __init__(self, states: np.ndarray):
        self.states = np.array(states, dtype=np.uint64)
        if np.any(self.states == 0):
            raise ValueError("xorshift state must be non-zero")

    @classmethod
    def seeded(cls, master: int, count: int, salt: int = 0) -> "XorshiftLanes":
        return cls(derive_seeds(master, count, salt))

    def __len__(self) -> int:
        return len(self.states)

    def next_u64(self, idx=None) -> np.ndarray:
        x = self.states if idx is None else self.states[idx]
        x = x ^ (x << np.uint64(13))
        x ^= x >> np.uint64(7)
        x ^= x << np.uint64(17)
        if idx is None:
            self.states = x
        else:
            self.states[idx] = x
        return x

    def uniform(self, idx=None) -> np.ndarray:
        """One uniform draw in (0, 1] from each selected lane."""
        x = self.next_u64(idx)
        return ((x >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _TWO_M53

    def uniform_matrix(self, columns: int) -> np.ndarray:
        """``columns`` successive draws per lane, shape ``(lanes, columns)``."""
        out = np.empty((len(self.states), columns), dtype=np.float64)
        for k in range(columns):
            out[:, k] = self.uniform()
        return out
