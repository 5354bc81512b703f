"""Counter-based random draws addressed by (seed, sample index).

A draw for index ``i`` depends only on the key and ``i``, so a sampler can be
replayed from any point and parallel replicates never share state. Draws are
produced by numpy's Philox generator in fixed-size chunks; only the current
chunk is cached.
"""

import numpy as np
from slstream.config import settings

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for (seed, *keys)."""
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


class CounterRng:
    """Uniform [0, 1) draw per stream index."""

    def __init__(self, seed: int, chunk: int = None):
        self.seed = int(seed) & _MASK64
        self.chunk = int(chunk or settings.RNG_CHUNK)
        self._chunk_id = -1
        self._cache = np.empty(0)

    def uniform(self, index: int) -> float:
        chunk_id, offset = divmod(int(index), self.chunk)
        if chunk_id != self._chunk_id:
            bitgen = np.random.Philox(key=self.seed, counter=[0, 0, 0, chunk_id])
            self._cache = np.random.Generator(bitgen).random(self.chunk)
            self._chunk_id = chunk_id
        return float(self._cache[offset])

    def tape(self, start: int, stop: int) -> np.ndarray:
        """Draws for indices [start, stop); used for replay checks."""
        return np.array([self.uniform(i) for i in range(start, stop)])

    def nbytes(self) -> int:
        return self._cache.nbytes
