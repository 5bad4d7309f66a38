"""
engine/rng.py

Seeded random-number contract shared by every module.

All randomness goes through Rng. A generator is a numpy PCG64 bit generator
seeded with a 64-bit integer, so equal seeds give equal draw sequences on
every platform. Independent child streams are derived with mix_seed:

    mix_seed(master, k1, k2, ...) =
        SeedSequence(entropy=master, spawn_key=(k1, k2, ...)).generate_state(1, uint64)[0]

which is numpy's documented hash-based seed derivation, so seeds are portable
across machines and numpy versions that keep the SeedSequence algorithm.
"""

from __future__ import annotations

import math

import numpy as np

# Below this rate Poisson draws use the exponential-product inversion.
POISSON_INVERSION_LIMIT = 30.0


def mix_seed(master_seed: int, *stream: int) -> int:
    """Derive a 64-bit child seed from a master seed and a stream index path."""
    if master_seed < 0 or any(k < 0 for k in stream):
        raise ValueError(f"seeds and stream indices must be non-negative: {master_seed}, {stream}")
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in stream))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


class Rng:
    """Deterministic generator owned by exactly one run or worker."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @classmethod
    def child(cls, master_seed: int, *stream: int) -> "Rng":
        return cls(mix_seed(master_seed, *stream))

    def uniform(self) -> float:
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    def uniform_between(self, low: float, high: float, size: int) -> np.ndarray:
        return self._gen.uniform(low, high, size)

    def integers(self, high: int, size: int) -> np.ndarray:
        return self._gen.integers(0, high, size)

    def poisson(self, lam: float) -> int:
        return poisson_draw(lam, self)

    def ptrs_poisson(self, lam: float) -> int:
        """numpy's transformed-rejection Poisson sampler, for large rates."""
        return int(self._gen.poisson(lam))


def poisson_draw(lam: float, rng: Rng) -> int:
    """
    Sample Poisson(lam).

    Small rates multiply uniforms until the product falls below exp(-lam);
    larger rates use numpy's PTRS transformed-rejection sampler, which keeps
    the exact mean and variance without underflowing exp(-lam).
    """
    if lam < 0 or not math.isfinite(lam):
        raise ValueError(f"Poisson rate must be finite and >= 0, got {lam}")
    if lam == 0:
        return 0
    if lam <= POISSON_INVERSION_LIMIT:
        threshold = math.exp(-lam)
        count = 0
        product = rng.uniform()
        while product > threshold:
            count += 1
            product *= rng.uniform()
        return count
    return rng.ptrs_poisson(lam)
