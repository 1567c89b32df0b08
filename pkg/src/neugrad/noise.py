"""Keyed Gaussian noise streams for reproducible parallel Monte Carlo.

Every path owns a counter-based Philox generator keyed by
``(seed, path_index)``.  The k-th standard normal drawn from a fresh
stream is therefore a pure function of ``(seed, path_index, k)``: it does
not depend on how many paths run concurrently, on chunk sizes, or on the
order in which workers finish.  Restarting a stream replays the identical
sequence, which makes common-random-number coupling exact by
construction.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_SKIP_BLOCK = 1 << 16


def _make_generator(seed: int, path_index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, path_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class NoiseStream:
    """Gaussian increment stream for a single simulated path.

    Draws are consumed sequentially; ``counter`` records how many normals
    have been produced.  Two streams with the same ``(seed, path_index)``
    yield bit-identical sequences.
    """

    def __init__(self, seed: int, path_index: int = 0):
        self.seed = int(seed)
        self.path_index = int(path_index)
        self.counter = 0
        self._gen = _make_generator(self.seed, self.path_index)

    def normals(self, shape) -> np.ndarray:
        """Next standard normals in the stream, C-order, given shape."""
        out = self._gen.standard_normal(shape)
        self.counter += out.size
        return out

    def skip(self, count: int) -> None:
        """Discard the next ``count`` normals, preserving alignment."""
        remaining = int(count)
        while remaining > 0:
            block = min(remaining, _SKIP_BLOCK)
            self._gen.standard_normal(block)
            remaining -= block
        self.counter += int(count)

    def restarted(self) -> "NoiseStream":
        """Fresh stream with the same key, positioned at the beginning."""
        return NoiseStream(self.seed, self.path_index)

    def sibling(self, path_index: int) -> "NoiseStream":
        """Fresh stream for another path under the same seed."""
        return NoiseStream(self.seed, path_index)

    def __repr__(self) -> str:
        return (f"NoiseStream(seed={self.seed}, path_index={self.path_index}, "
                f"counter={self.counter})")


def path_generators(seed: int, path_lo: int, path_hi: int) -> list[np.random.Generator]:
    """One generator per path index in ``[path_lo, path_hi)``."""
    return [_make_generator(seed, i) for i in range(path_lo, path_hi)]


def fill_normals(generators, steps: int, dim: int, out: np.ndarray | None = None) -> np.ndarray:
    """Draw the next ``steps * dim`` normals of every path into a block.

    Returns an array of shape ``(len(generators), steps, dim)`` where row i
    continues path i's sequence; entry ``[i, k, j]`` is the j-th component
    of the k-th time step in this block.
    """
    m = len(generators)
    if out is None:
        out = np.empty((m, steps, dim))
    flat = out.reshape(m, steps * dim)
    for i, gen in enumerate(generators):
        flat[i] = gen.standard_normal(steps * dim)
    return out


def skip_normals(generators, count: int) -> None:
    """Advance every generator past ``count`` normals."""
    for gen in generators:
        remaining = int(count)
        while remaining > 0:
            block = min(remaining, _SKIP_BLOCK)
            gen.standard_normal(block)
            remaining -= block
