"""
engine/choice.py

Discrete choice mathematics for users waiting on the platform.

    dU = beta_c * c + beta_tau * tau
    p_shift = 1 / (1 + exp(-dU))

c is the platform population normalized by platform capacity, tau the
elapsed trip time plus the wait until the next train. Once a user shifts,
the alternative mode is drawn from fixed nested shares.

Pure functions; the only state is the Rng passed in.
"""

from __future__ import annotations

import math
from typing import Mapping, Union

import numpy as np

from engine.models import (
    ALTERNATIVE_MODES,
    SHARE_TOLERANCE,
    BehaviouralParams,
    ConfigValidationError,
    ModeId,
    ShiftConvention,
)
from engine.rng import Rng

ArrayLike = Union[float, np.ndarray]


def perceived_congestion(waiting_count: int, platform_capacity: int) -> float:
    """Platform occupancy ratio; above 1 on an overcrowded platform."""
    return waiting_count / platform_capacity


def perceived_time(elapsed: ArrayLike, wait_to_next_train: ArrayLike) -> ArrayLike:
    return elapsed + wait_to_next_train


def delta_utility(params: BehaviouralParams, c: ArrayLike, tau: ArrayLike) -> ArrayLike:
    return params.beta_c * c + params.beta_tau * tau


def shift_probability(delta_u: float) -> float:
    """Logistic of delta_u, evaluated without overflow on either tail."""
    if delta_u >= 0:
        return 1.0 / (1.0 + math.exp(-delta_u))
    z = math.exp(delta_u)
    return z / (1.0 + z)


def shift_probabilities(delta_u: np.ndarray) -> np.ndarray:
    """Vectorized shift_probability."""
    delta_u = np.asarray(delta_u, dtype=float)
    z = np.exp(-np.abs(delta_u))
    return np.where(delta_u >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def signed_utility(params: BehaviouralParams, delta_u: ArrayLike) -> ArrayLike:
    """Map the utility difference to the argument of the shift logistic."""
    if params.shift_convention == ShiftConvention.literal:
        return -delta_u
    return delta_u


# ---------------------------------------------------------
# Alternative mode selection
# ---------------------------------------------------------

def cumulative_shares(shares: Mapping[ModeId, float]) -> np.ndarray:
    """Cumulative share vector in the fixed alternative-mode order."""
    problems = []
    if shares.get(ModeId.rer, 0.0) != 0.0:
        problems.append("modes.rer.shift_share: main mode cannot be a shift target")
    missing = [mode.value for mode in ALTERNATIVE_MODES if mode not in shares]
    if missing:
        problems.append(f"modes.*.shift_share: missing {', '.join(missing)}")
    else:
        values = [shares[mode] for mode in ALTERNATIVE_MODES]
        if any(v < 0 or v > 1 for v in values):
            problems.append("modes.*.shift_share: shares must lie in [0, 1]")
        total = sum(values)
        if abs(total - 1.0) > SHARE_TOLERANCE:
            problems.append(f"modes.*.shift_share: alternative shares sum to {total:.12g}, expected 1")
    if problems:
        raise ConfigValidationError(problems)
    return np.cumsum([shares[mode] for mode in ALTERNATIVE_MODES])


def pick_alternatives(cumulative: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """
    Indices into ALTERNATIVE_MODES for uniform draws in [0, 1).

    Draw u falls in the first interval whose cumulative bound exceeds it, so
    zero-share modes are never picked. Rounding slack above the last bound is
    assigned to the last mode with a positive share.
    """
    index = np.searchsorted(cumulative, draws, side="right")
    last_positive = int(np.flatnonzero(np.diff(np.concatenate(([0.0], cumulative))) > 0)[-1])
    return np.minimum(index, last_positive)


def choose_alternative(shares: Mapping[ModeId, float], rng: Rng) -> ModeId:
    cumulative = cumulative_shares(shares)
    index = pick_alternatives(cumulative, np.array([rng.uniform()]))[0]
    return ALTERNATIVE_MODES[int(index)]
