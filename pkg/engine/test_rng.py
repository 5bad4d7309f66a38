"""
engine/test_rng.py

Tests for the seeded random-number contract.

Tests verify:
1. Equal seeds give equal sequences
2. Child streams differ from each other
3. Poisson draws have the right mean and variance on both samplers

Run:
    pytest engine/test_rng.py -v
"""

import math

import numpy as np
import pytest

from engine.rng import Rng, mix_seed, poisson_draw


def test_same_seed_same_sequence():
    a, b = Rng(42), Rng(42)
    assert [poisson_draw(7.5, a) for _ in range(200)] == [poisson_draw(7.5, b) for _ in range(200)]
    assert np.array_equal(Rng(42).uniforms(50), Rng(42).uniforms(50))


def test_mix_seed_deterministic_and_distinct():
    assert mix_seed(1, 2, 3) == mix_seed(1, 2, 3)
    seeds = {mix_seed(0, i, r) for i in range(50) for r in range(10)}
    assert len(seeds) == 500
    assert mix_seed(0, 1) != mix_seed(1, 0)


def test_mix_seed_rejects_negative():
    with pytest.raises(ValueError):
        mix_seed(-1, 0)


def test_poisson_zero_rate():
    rng = Rng(5)
    assert all(poisson_draw(0.0, rng) == 0 for _ in range(100))


@pytest.mark.parametrize("lam", [-1.0, math.inf, math.nan])
def test_poisson_bad_rate(lam):
    with pytest.raises(ValueError):
        poisson_draw(lam, Rng(0))


@pytest.mark.parametrize("lam", [1.0, 10.0, 100.0])
def test_poisson_moments(lam):
    """10^4 draws: mean within 3 standard errors, variance within 4."""
    n = 10_000
    rng = Rng(int(lam) + 17)
    draws = np.array([poisson_draw(lam, rng) for _ in range(n)], dtype=float)
    assert abs(draws.mean() - lam) < 3 * math.sqrt(lam / n)
    variance_se = math.sqrt((lam + 2 * lam**2) / n)
    assert abs(draws.var(ddof=1) - lam) < 4 * variance_se


def test_large_rate_uses_rejection_sampler():
    """Above the inversion limit draws come from Rng.ptrs_poisson, one call each."""
    a, b = Rng(23), Rng(23)
    assert [poisson_draw(100.0, a) for _ in range(50)] == [b.ptrs_poisson(100.0) for _ in range(50)]


def test_small_rate_keeps_inversion():
    a, b = Rng(29), Rng(29)
    drawn = [poisson_draw(2.0, a) for _ in range(200)]
    assert drawn != [b.ptrs_poisson(2.0) for _ in range(200)]
