"""
engine/models.py

Domain types for the modal shift simulator.

Every run is driven by a single SimulationConfig: behavioural parameters,
train service, per-mode specs, horizon, transfer time and seed. Validation
collects every violated invariant instead of stopping at the first one, so a
bad configuration file is reported in one pass.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from domains.transit.models.mode_id import ModeId
from engine.config import (
    DEFAULT_ALTERNATIVES,
    DEFAULT_BOARDING_RATE,
    DEFAULT_HORIZON,
    DEFAULT_MAX_DWELL,
    DEFAULT_PLATFORM_CAPACITY,
    DEFAULT_RER_ARRIVAL_RATE,
    DEFAULT_SEED,
    DEFAULT_SEGMENT_SLOTS,
    DEFAULT_TRAIN_CAPACITY,
    DEFAULT_TRAIN_INTERVAL,
    DEFAULT_TRANSFER_TIME,
)

SHARE_TOLERANCE = 1e-9
MAX_SEED = 2**64 - 1


# ============================================================================
# Enums
# ============================================================================

MAIN_MODE = ModeId.rer
ALL_MODES: tuple[ModeId, ...] = tuple(ModeId)
ALTERNATIVE_MODES: tuple[ModeId, ...] = (
    ModeId.metro,
    ModeId.bus,
    ModeId.taxi,
    ModeId.bike,
    ModeId.walk,
)


class ShiftConvention(str, Enum):
    """How the logistic of the utility difference maps to a shift."""
    complement = "complement"  # p_shift = 1 / (1 + exp(-dU))
    literal = "literal"        # p_shift = 1 / (1 + exp(dU))


class CongestionWeighting(str, Enum):
    unweighted = "unweighted"
    demand = "demand"


class ConfigValidationError(ValueError):
    """Raised when a configuration breaks one or more invariants."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration: " + "; ".join(self.violations))


# ============================================================================
# Parameter groups
# ============================================================================

class BehaviouralParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta_c: float = Field(0.0, description="Weight of perceived congestion in the utility difference")
    beta_tau: float = Field(0.0, description="Weight of perceived time (per minute)")
    shift_convention: ShiftConvention = Field(
        ShiftConvention.complement,
        description="Whether the logistic gives the shift probability or its complement",
    )


class ModeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    traversal_time: int = Field(1, description="Minutes to cross the segment on this mode")
    queue_capacity: int = Field(1, description="Users the mode can carry at once")
    arrival_rate: float = Field(0.0, description="Poisson arrival rate, users per minute")
    shift_share: float = Field(0.0, description="Probability of picking this mode once a shift is decided")


class ServiceParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train_interval: int = Field(DEFAULT_TRAIN_INTERVAL, description="Minutes between trains (I)")
    train_capacity: int = Field(DEFAULT_TRAIN_CAPACITY, description="Users that can board one train (C)")
    boarding_rate: int = Field(DEFAULT_BOARDING_RATE, description="Users boarding per minute")
    max_dwell: int = Field(DEFAULT_MAX_DWELL, description="Maximal minutes a train waits in station")
    segment_slots: int = Field(DEFAULT_SEGMENT_SLOTS, description="Slots (minutes) of the segment")
    platform_capacity: int = Field(DEFAULT_PLATFORM_CAPACITY, description="Normalization of perceived congestion")


def default_modes() -> Dict[ModeId, ModeSpec]:
    modes = {
        ModeId.rer: ModeSpec(
            traversal_time=DEFAULT_SEGMENT_SLOTS,
            queue_capacity=DEFAULT_TRAIN_CAPACITY,
            arrival_rate=DEFAULT_RER_ARRIVAL_RATE,
            shift_share=0.0,
        )
    }
    for name, (traversal, capacity, rate, share) in DEFAULT_ALTERNATIVES.items():
        modes[ModeId(name)] = ModeSpec(
            traversal_time=traversal,
            queue_capacity=capacity,
            arrival_rate=rate,
            shift_share=share,
        )
    return modes


class SimulationConfig(BaseModel):
    """Single source of truth for one simulation run."""

    model_config = ConfigDict(extra="forbid")

    behavioural: BehaviouralParams = Field(default_factory=BehaviouralParams)
    service: ServiceParams = Field(default_factory=ServiceParams)
    modes: Dict[ModeId, ModeSpec] = Field(default_factory=default_modes)
    horizon: int = Field(DEFAULT_HORIZON, description="Number of one-minute steps (t_f)")
    transfer_time: int = Field(DEFAULT_TRANSFER_TIME, description="Minutes to reach an alternative mode")
    seed: int = Field(DEFAULT_SEED, description="64-bit unsigned seed")
    allow_reshift: bool = Field(False, description="Let shifted users blocked by a full queue shift again")
    congestion_weighting: CongestionWeighting = Field(CongestionWeighting.unweighted)

    def shares(self) -> Dict[ModeId, float]:
        return {mode: self.modes[mode].shift_share for mode in ALTERNATIVE_MODES}

    def with_scenario(
        self,
        *,
        beta_c: Optional[float] = None,
        beta_tau: Optional[float] = None,
        train_capacity: Optional[int] = None,
        train_interval: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> "SimulationConfig":
        """Copy with the explored parameters replaced."""
        behavioural = self.behavioural.model_copy(update={
            k: v for k, v in (("beta_c", beta_c), ("beta_tau", beta_tau)) if v is not None
        })
        service = self.service.model_copy(update={
            k: v for k, v in (("train_capacity", train_capacity), ("train_interval", train_interval)) if v is not None
        })
        update = {"behavioural": behavioural, "service": service}
        if seed is not None:
            update["seed"] = seed
        return self.model_copy(update=update)


# ============================================================================
# Validation
# ============================================================================

def config_violations(config: SimulationConfig) -> List[str]:
    """Return every violated invariant, empty when the config is valid."""
    violations: List[str] = []

    for name in ("beta_c", "beta_tau"):
        value = getattr(config.behavioural, name)
        if not math.isfinite(value):
            violations.append(f"behavioural.{name}: must be finite, got {value}")

    service = config.service
    for name in ("train_interval", "train_capacity", "boarding_rate", "max_dwell", "segment_slots", "platform_capacity"):
        value = getattr(service, name)
        if value < 1:
            violations.append(f"service.{name}: must be >= 1, got {value}")

    missing = [mode.value for mode in ALL_MODES if mode not in config.modes]
    if missing:
        violations.append(f"modes: missing {', '.join(missing)}")

    for mode, spec in config.modes.items():
        prefix = f"modes.{mode.value}"
        if spec.traversal_time < 1:
            violations.append(f"{prefix}.traversal_time: must be >= 1, got {spec.traversal_time}")
        if spec.queue_capacity < 1:
            violations.append(f"{prefix}.queue_capacity: must be >= 1, got {spec.queue_capacity}")
        if not math.isfinite(spec.arrival_rate) or spec.arrival_rate < 0:
            violations.append(f"{prefix}.arrival_rate: must be finite and >= 0, got {spec.arrival_rate}")
        if not (0.0 <= spec.shift_share <= 1.0):
            violations.append(f"{prefix}.shift_share: must be in [0, 1], got {spec.shift_share}")

    rer = config.modes.get(ModeId.rer)
    if rer is not None and rer.shift_share != 0.0:
        violations.append(f"modes.rer.shift_share: main mode share must be 0, got {rer.shift_share}")

    if not missing:
        total = sum(config.modes[mode].shift_share for mode in ALTERNATIVE_MODES)
        if abs(total - 1.0) > SHARE_TOLERANCE:
            violations.append(f"modes.*.shift_share: alternative shares sum to {total:.12g}, expected 1")

    if config.horizon < 1:
        violations.append(f"horizon: must be >= 1, got {config.horizon}")
    if config.transfer_time < 0:
        violations.append(f"transfer_time: must be >= 0, got {config.transfer_time}")
    if not (0 <= config.seed <= MAX_SEED):
        violations.append(f"seed: must be a 64-bit unsigned integer, got {config.seed}")

    return violations


def validate_config(config: SimulationConfig) -> SimulationConfig:
    violations = config_violations(config)
    if violations:
        raise ConfigValidationError(violations)
    return config


def default_config(**overrides) -> SimulationConfig:
    """Reference scenario; keyword overrides go through with_scenario."""
    config = SimulationConfig()
    if overrides:
        config = config.with_scenario(**overrides)
    return config
