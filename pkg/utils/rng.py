import typing as tp

import numpy as np


class SeededStream:
    """
    Seeded randomness stream shared by a protocol run.

    Children are derived with `spawn(index)` from the pair (seed, index) only,
    so shot `i` of an experiment draws the same numbers no matter which worker
    runs it or in which order.
    """

    def __init__(self, seed: int, spawn_key: tp.Tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.spawn_key = tuple(spawn_key)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, index: int) -> "SeededStream":
        return SeededStream(self.seed, self.spawn_key + (int(index),))

    def uniform(self) -> float:
        return float(self._generator.random())

    def choice(self, probabilities: tp.Sequence[float]) -> int:
        """Draw an index with the given probabilities (assumed to sum to 1)."""
        cumulative = np.cumsum(probabilities)
        index = int(np.searchsorted(cumulative, self.uniform() * cumulative[-1], side="right"))
        return min(index, len(cumulative) - 1)

    def normal(self, size: int) -> np.ndarray:
        return self._generator.standard_normal(size)

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, spawn_key={self.spawn_key})"


def derive_seed(seed: int, *keys: int) -> int:
    """Per-shot integer seed, a pure function of (seed, keys)."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
