"""Deterministic, splittable random streams built on PCG64."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Rng:
    """Value-semantics handle for a reproducible PCG64 stream.

    A stream is identified by a 64-bit seed plus a tuple of non-negative
    integer substream labels. Equal handles yield equal draw sequences on
    every platform; handles with distinct label tuples are statistically
    independent. The handle itself holds no generator state, so passing it
    around (or re-deriving it) never perturbs anyone else's draws.
    """

    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", self.seed & _MASK64)
        for label in self.key:
            if not 0 <= label < (1 << 32):
                raise ValueError(f"substream label out of range: {label}")

    def substream(self, *labels: int) -> "Rng":
        """Derive an independent child stream named by ``labels``."""
        return Rng(self.seed, self.key + labels)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))
