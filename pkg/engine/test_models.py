"""
engine/test_models.py

Tests for configuration types and validation.

Tests verify:
1. Defaults match the documented peak-period setup
2. Validation collects every violated invariant
3. Share sums are checked within 1e-9
4. with_scenario replaces only the explored parameters
5. Result schemas do not depend on the engine

Run:
    pytest engine/test_models.py -v
"""

import ast
import math
from pathlib import Path

import pytest

from engine.models import (
    ALTERNATIVE_MODES,
    ConfigValidationError,
    ModeId,
    SimulationConfig,
    config_violations,
    default_config,
    validate_config,
)


def with_modes(config: SimulationConfig, **updates) -> SimulationConfig:
    modes = dict(config.modes)
    for name, fields in updates.items():
        modes[ModeId(name)] = modes[ModeId(name)].model_copy(update=fields)
    return config.model_copy(update={"modes": modes})


# ============================================================================
# Defaults
# ============================================================================

def test_default_config_values():
    """Defaults: 240 minutes, transfer 5, Rer demand 100, boarding 1000, dwell 2, 4 slots."""
    config = default_config()
    assert config.horizon == 240
    assert config.transfer_time == 5
    assert config.modes[ModeId.rer].arrival_rate == 100.0
    assert config.service.boarding_rate == 1000
    assert config.service.max_dwell == 2
    assert config.service.segment_slots == 4
    assert config.modes[ModeId.metro].queue_capacity == 3500
    assert config_violations(config) == []


def test_default_shares_sum_to_one():
    config = default_config()
    assert math.isclose(sum(config.shares().values()), 1.0, abs_tol=1e-9)
    assert ModeId.rer not in config.shares()


# ============================================================================
# Validation
# ============================================================================

def test_shares_summing_to_point_nine_rejected():
    """Dropping 0.1 of the Metro share names shift_share in the error."""
    config = with_modes(default_config(), metro={"shift_share": 0.45})
    with pytest.raises(ConfigValidationError) as exc:
        validate_config(config)
    assert any("shift_share" in v and "0.9" in v for v in exc.value.violations)


def test_every_violation_reported():
    config = default_config().model_copy(update={"horizon": 0, "transfer_time": -1})
    config = config.model_copy(update={
        "service": config.service.model_copy(update={"train_capacity": 0})
    })
    violations = config_violations(config)
    assert any(v.startswith("horizon") for v in violations)
    assert any(v.startswith("transfer_time") for v in violations)
    assert any(v.startswith("service.train_capacity") for v in violations)


def test_rer_share_must_be_zero():
    config = with_modes(default_config(), rer={"shift_share": 0.1})
    assert any(v.startswith("modes.rer.shift_share") for v in config_violations(config))


def test_non_finite_beta_rejected():
    config = default_config(beta_c=math.inf)
    assert any(v.startswith("behavioural.beta_c") for v in config_violations(config))


def test_missing_mode_rejected():
    config = default_config()
    modes = {m: s for m, s in config.modes.items() if m != ModeId.walk}
    config = config.model_copy(update={"modes": modes})
    assert any("walk" in v for v in config_violations(config))


def test_share_out_of_range_rejected():
    config = with_modes(default_config(), metro={"shift_share": 1.5})
    assert any(v.startswith("modes.metro.shift_share") for v in config_violations(config))


# ============================================================================
# Scenario copies
# ============================================================================

def test_with_scenario_replaces_explored_fields_only():
    base = default_config()
    config = base.with_scenario(beta_c=2.0, train_capacity=500, seed=7)
    assert config.behavioural.beta_c == 2.0
    assert config.behavioural.beta_tau == base.behavioural.beta_tau
    assert config.service.train_capacity == 500
    assert config.service.train_interval == base.service.train_interval
    assert config.seed == 7
    assert base.behavioural.beta_c == 0.0
    assert [m for m in ALTERNATIVE_MODES] == [ModeId.metro, ModeId.bus, ModeId.taxi, ModeId.bike, ModeId.walk]


# ============================================================================
# Result schemas
# ============================================================================

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "domains" / "transit" / "models"


def imported_modules(path: Path):
    tree = ast.parse(path.read_text(encoding="utf-8"))
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom) and node.module:
            yield node.module
        elif isinstance(node, ast.Import):
            yield from (alias.name for alias in node.names)


def test_schemas_import_nothing_from_engine():
    files = sorted(SCHEMA_DIR.glob("*.py"))
    assert files
    for path in files:
        assert not [m for m in imported_modules(path) if m.split(".")[0] == "engine"], path.name


def test_engine_mode_id_is_the_schema_enum():
    from domains.transit.models.mode_id import ModeId as SchemaModeId
    assert ModeId is SchemaModeId
