"""Deterministic random streams with splittable replica substreams."""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    """Derive a child seed from ``(seed, index)`` with a splitmix64 finalizer.

    The rule is fixed so that replica streams are reproducible across
    platforms and languages:

        z = seed + 0x9E3779B97F4A7C15 * (index + 1)   (mod 2**64)

    followed by the three xor-shift / multiply rounds of splitmix64.
    """
    z = (seed + _GOLDEN * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class RandomStream:
    """A seeded PCG64 stream; identical seeds give bit-identical draws.

    Streams are single-owner: never share one instance across concurrent
    tasks.  Replica parallelism uses ``substream(i)``, which derives an
    independent child stream keyed by ``mix64(seed, i)``.
    """

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed})"

    def substream(self, index: int) -> RandomStream:
        """Independent stream for replica ``index``; see :func:`mix64`."""
        if index < 0:
            raise ValueError("substream index must be nonnegative")
        return RandomStream(mix64(self.seed, index))

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1)."""
        return self._gen.random(n)

    def uniform(self) -> float:
        return float(self._gen.random())
