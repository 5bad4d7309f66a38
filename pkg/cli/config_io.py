"""
cli/config_io.py

Flat configuration files: one `section.key = value` per line, `#` starts a
comment, blank lines ignored, lists comma-separated.

Simulation keys:
    behavioural.beta_c, behavioural.beta_tau, behavioural.shift_convention
    service.train_interval, service.train_capacity, service.boarding_rate,
    service.max_dwell, service.segment_slots, service.platform_capacity
    modes.<mode>.traversal_time, .queue_capacity, .arrival_rate, .shift_share
    run.horizon, run.transfer_time, run.seed, run.allow_reshift
    indicators.congestion_weighting

Sweep keys (sweep.*) and optimizer keys (optimize.*) live in their own files.
Missing keys take the defaults; unknown keys are rejected with their line.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

from engine.models import (
    ALL_MODES,
    CongestionWeighting,
    ModeId,
    ShiftConvention,
    SimulationConfig,
    validate_config,
)
from engine.optimizer import OptimizeSpec, congested_scenario
from engine.sweep import SweepSpec

KEY_PATTERN = re.compile(r"^[a-z_]+(\.[a-z_]+)+$")
TRUE_WORDS = ("true", "yes", "1")
FALSE_WORDS = ("false", "no", "0")


class ConfigParseError(ValueError):
    """Malformed line, unknown key or unparsable value."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


# ============================================================================
# Value parsers
# ============================================================================

def _int(raw: str) -> int:
    return int(raw)


def _float(raw: str) -> float:
    return float(raw)


def _bool(raw: str) -> bool:
    word = raw.lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def _list(item: Callable[[str], object]) -> Callable[[str], list]:
    def parse(raw: str) -> list:
        parts = [p.strip() for p in raw.split(",")]
        if any(not p for p in parts):
            raise ValueError(f"empty list item in {raw!r}")
        return [item(p) for p in parts]
    return parse


def _pair(raw: str) -> Tuple[float, float]:
    values = _list(_float)(raw)
    if len(values) != 2:
        raise ValueError(f"expected 'low, high', got {raw!r}")
    return values[0], values[1]


# ============================================================================
# Flat reader
# ============================================================================

def parse_flat(text: str) -> List[Tuple[int, str, str]]:
    """(line number, key, raw value) for every setting line."""
    entries: List[Tuple[int, str, str]] = []
    seen: Dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigParseError(number, f"expected 'section.key = value', got {content!r}")
        key, raw = (part.strip() for part in content.split("=", 1))
        if not KEY_PATTERN.match(key):
            raise ConfigParseError(number, f"malformed key {key!r}")
        if not raw:
            raise ConfigParseError(number, f"missing value for {key}")
        if key in seen:
            raise ConfigParseError(number, f"duplicate key {key} (first on line {seen[key]})")
        seen[key] = number
        entries.append((number, key, raw))
    return entries


def _convert(number: int, key: str, raw: str, parser: Callable[[str], object]):
    try:
        return parser(raw)
    except ValueError as exc:
        raise ConfigParseError(number, f"{key}: {exc}") from exc


# ============================================================================
# Simulation config
# ============================================================================

SIMULATION_KEYS: Dict[str, Callable[[str], object]] = {
    "behavioural.beta_c": _float,
    "behavioural.beta_tau": _float,
    "behavioural.shift_convention": ShiftConvention,
    "service.train_interval": _int,
    "service.train_capacity": _int,
    "service.boarding_rate": _int,
    "service.max_dwell": _int,
    "service.segment_slots": _int,
    "service.platform_capacity": _int,
    "run.horizon": _int,
    "run.transfer_time": _int,
    "run.seed": _int,
    "run.allow_reshift": _bool,
    "indicators.congestion_weighting": CongestionWeighting,
}
MODE_KEYS: Dict[str, Callable[[str], object]] = {
    "traversal_time": _int,
    "queue_capacity": _int,
    "arrival_rate": _float,
    "shift_share": _float,
}
RUN_FIELDS = {"run.horizon": "horizon", "run.transfer_time": "transfer_time", "run.seed": "seed",
              "run.allow_reshift": "allow_reshift", "indicators.congestion_weighting": "congestion_weighting"}


def _mode_key(key: str) -> Optional[Tuple[ModeId, str]]:
    parts = key.split(".")
    if len(parts) != 3 or parts[0] != "modes" or parts[2] not in MODE_KEYS:
        return None
    try:
        return ModeId(parts[1]), parts[2]
    except ValueError:
        return None


def parse_config(text: str) -> SimulationConfig:
    """
    Build and validate a SimulationConfig from flat text.

    Raises:
        ConfigParseError: malformed line, unknown key, bad value
        ConfigValidationError: the resulting configuration breaks invariants
    """
    behavioural: Dict[str, object] = {}
    service: Dict[str, object] = {}
    modes: Dict[ModeId, Dict[str, object]] = {}
    top: Dict[str, object] = {}

    for number, key, raw in parse_flat(text):
        mode_key = _mode_key(key)
        if mode_key is not None:
            mode, name = mode_key
            modes.setdefault(mode, {})[name] = _convert(number, key, raw, MODE_KEYS[name])
            continue
        if key not in SIMULATION_KEYS:
            raise ConfigParseError(number, f"unknown key {key}")
        value = _convert(number, key, raw, SIMULATION_KEYS[key])
        section, name = key.split(".", 1)
        if section == "behavioural":
            behavioural[name] = value
        elif section == "service":
            service[name] = value
        else:
            top[RUN_FIELDS[key]] = value

    config = SimulationConfig()
    merged_modes = {
        mode: spec.model_copy(update=modes.get(mode, {})) for mode, spec in config.modes.items()
    }
    config = config.model_copy(update={
        "behavioural": config.behavioural.model_copy(update=behavioural),
        "service": config.service.model_copy(update=service),
        "modes": merged_modes,
        **top,
    })
    return validate_config(config)


def _format(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def serialize_config(config: SimulationConfig) -> str:
    """Every key, floats in repr form so parsing back gives equal values."""
    lines = ["# modalshift simulation configuration"]
    for name, value in config.behavioural.model_dump().items():
        lines.append(f"behavioural.{name} = {_format(value)}")
    for name, value in config.service.model_dump().items():
        lines.append(f"service.{name} = {_format(value)}")
    for mode in ALL_MODES:
        for name, value in config.modes[mode].model_dump().items():
            lines.append(f"modes.{mode.value}.{name} = {_format(value)}")
    for key, name in RUN_FIELDS.items():
        lines.append(f"{key} = {_format(getattr(config, name))}")
    return "\n".join(lines) + "\n"


def load_config(path: Optional[Union[str, Path]]) -> SimulationConfig:
    """Config from a file, or the defaults when no path is given."""
    if path is None:
        return validate_config(SimulationConfig())
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ============================================================================
# Sweep and optimizer specs
# ============================================================================

SWEEP_KEYS: Dict[str, Callable[[str], object]] = {
    "sweep.beta_c_values": _list(_float),
    "sweep.beta_tau_values": _list(_float),
    "sweep.capacity_values": _list(_int),
    "sweep.interval_values": _list(_int),
    "sweep.replications": _int,
    "sweep.master_seed": _int,
}

OPTIMIZE_KEYS: Dict[str, Callable[[str], object]] = {
    "optimize.population": _int,
    "optimize.generations": _int,
    "optimize.replications": _int,
    "optimize.beta_c_bounds": _pair,
    "optimize.beta_tau_bounds": _pair,
    "optimize.crossover_probability": _float,
    "optimize.eta_c": _float,
    "optimize.mutation_probability": _float,
    "optimize.eta_m": _float,
    "optimize.master_seed": _int,
    "optimize.convergence_log": _bool,
}


def _read_section(text: str, keys: Dict[str, Callable[[str], object]]) -> Dict[str, object]:
    values: Dict[str, object] = {}
    for number, key, raw in parse_flat(text):
        if key not in keys:
            raise ConfigParseError(number, f"unknown key {key}")
        values[key.split(".", 1)[1]] = _convert(number, key, raw, keys[key])
    return values


def parse_sweep(text: str, base: Optional[SimulationConfig] = None) -> SweepSpec:
    values = _read_section(text, SWEEP_KEYS)
    return SweepSpec(base=base or SimulationConfig(), **values)


def parse_optimize(text: str, base: Optional[SimulationConfig] = None) -> OptimizeSpec:
    values = _read_section(text, OPTIMIZE_KEYS)
    spec = OptimizeSpec(base=base or congested_scenario())
    bounds = list(spec.bounds)
    if "beta_c_bounds" in values:
        bounds[0] = values.pop("beta_c_bounds")
    if "beta_tau_bounds" in values:
        bounds[1] = values.pop("beta_tau_bounds")
    return spec.model_copy(update={**values, "bounds": bounds})
