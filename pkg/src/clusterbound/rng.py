"""Reproducible per-sample random streams.

Each sample gets its own counter-based Philox stream whose key is derived
from ``(seed, sample_index)`` by a splitmix64 scrambler, so results do not
depend on which worker draws which sample. Normals come from Box-Muller on
53-bit uniforms.
"""

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x):
    """One splitmix64 output for the 64-bit state ``x``."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed, index):
    """128-bit Philox key for sample ``index`` under ``seed``."""
    if seed < 0 or seed > _MASK:
        raise ValueError("seed must be a 64-bit unsigned integer")
    a = splitmix64(seed)
    b = splitmix64(a ^ splitmix64(index))
    return np.array([a, splitmix64(b)], dtype=np.uint64)


class SampleStream:
    """Standard-normal draws for one sample."""

    def __init__(self, seed, index):
        self._bits = np.random.Philox(key=stream_key(seed, index))

    def uniform(self, size):
        """Uniforms in (0, 1] built from the top 53 bits of each raw word."""
        raw = np.asarray(self._bits.random_raw(size), dtype=np.uint64)
        return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53

    def normal(self, shape):
        """Box-Muller normals filled in row-major order."""
        count = int(np.prod(shape))
        pairs = (count + 1) // 2
        u1 = self.uniform(pairs)
        u2 = self.uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:count].reshape(shape)
