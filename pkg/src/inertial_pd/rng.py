"""Seedable counter-based random numbers for reproducible problem generation.

The generator is SplitMix64 used in counter mode: draw ``i`` of a stream with
seed ``s`` is ``mix64(s + (i+1) * GOLDEN)``.  Streams are split per array by
name, ``child_seed = mix64(root_seed XOR fnv1a64(name))``, so adding a new
array to a generator never perturbs the existing ones.  Gaussians come from
the Box-Muller transform.  All of this is plain 64-bit integer arithmetic and
reproduces bit-for-bit across platforms and languages.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    # 64-bit wraparound is the point; silence numpy's overflow warning
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def fnv1a64(name: str) -> int:
    """FNV-1a hash of a stream label."""
    h = _FNV_OFFSET
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class Stream:
    """One named SplitMix64 stream; successive calls continue the counter."""

    def __init__(self, seed: int, name: str = ""):
        root = np.uint64(seed & _MASK64)
        if name:
            root = _mix64(root ^ np.uint64(fnv1a64(name)))
        self._seed = root
        self._counter = 0

    def raw(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words."""
        idx = np.arange(self._counter + 1, self._counter + count + 1,
                        dtype=np.uint64)
        self._counter += count
        with np.errstate(over="ignore"):
            state = self._seed + idx * _GOLDEN
        return _mix64(state)

    def uniform(self, count: int) -> np.ndarray:
        """Uniform doubles in [0, 1) from the top 53 bits of each word."""
        return (self.raw(count) >> np.uint64(11)) * (2.0 ** -53)

    def normal(self, count: int) -> np.ndarray:
        """Standard Gaussians via Box-Muller on consecutive uniform pairs."""
        pairs = (count + 1) // 2
        # u1 in (0, 1] so log never sees zero
        u1 = ((self.raw(pairs) >> np.uint64(11)) + np.uint64(1)) * (2.0 ** -53)
        u2 = self.uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:count]


def stream(seed: int, name: str) -> Stream:
    """Child stream of ``seed`` dedicated to the array called ``name``."""
    return Stream(seed, name)
