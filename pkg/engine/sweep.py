"""
engine/sweep.py

Cartesian-grid exploration of (beta_c, beta_tau, train_capacity, train_interval)
with stochastic replications.

Replication r of grid tuple i runs with seed mix_seed(master_seed, i, r).
Each tuple is one joblib task and results are keyed by tuple index, so the
output does not depend on the number of workers.
"""

from __future__ import annotations

import itertools
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field

from domains.transit.models.sweep_row import SweepRow
from engine.indicators import SCALAR_INDICATORS, format_csv, result_scalars
from engine.models import ConfigValidationError, SimulationConfig, config_violations
from engine.output import write_text_atomic
from engine.rng import mix_seed
from engine.simulation import run

logger = logging.getLogger(__name__)

GridTuple = Tuple[float, float, int, int]

PARAMETER_COLUMNS = ["beta_c", "beta_tau", "train_capacity", "train_interval"]

DEFAULT_BETA_VALUES = [float(v) for v in range(-5, 5)]
DEFAULT_CAPACITY_VALUES = [500, 1000, 1500, 2000]
DEFAULT_INTERVAL_VALUES = [2, 3, 4, 5, 8, 10]
DEFAULT_REPLICATIONS = 10


class SweepRunError(RuntimeError):
    """A replication of one grid tuple failed."""

    def __init__(self, tuple_index: int, params: GridTuple, detail: str):
        self.tuple_index = tuple_index
        self.params = params
        beta_c, beta_tau, capacity, interval = params
        super().__init__(
            f"grid tuple {tuple_index} (beta_c={beta_c}, beta_tau={beta_tau}, "
            f"train_capacity={capacity}, train_interval={interval}): {detail}"
        )


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base: SimulationConfig = Field(default_factory=SimulationConfig)
    beta_c_values: List[float] = Field(default_factory=lambda: list(DEFAULT_BETA_VALUES))
    beta_tau_values: List[float] = Field(default_factory=lambda: list(DEFAULT_BETA_VALUES))
    capacity_values: List[int] = Field(default_factory=lambda: list(DEFAULT_CAPACITY_VALUES))
    interval_values: List[int] = Field(default_factory=lambda: list(DEFAULT_INTERVAL_VALUES))
    replications: int = Field(DEFAULT_REPLICATIONS, description="Runs per grid tuple")
    master_seed: int = Field(0, description="Root of every replication seed")

    def run_count(self) -> int:
        return len(build_grid(self)) * self.replications


def sweep_violations(spec: SweepSpec) -> List[str]:
    violations = []
    for name in ("beta_c_values", "beta_tau_values", "capacity_values", "interval_values"):
        if not getattr(spec, name):
            violations.append(f"sweep.{name}: must not be empty")
    if spec.replications < 1:
        violations.append(f"sweep.replications: must be >= 1, got {spec.replications}")
    if spec.master_seed < 0:
        violations.append(f"sweep.master_seed: must be >= 0, got {spec.master_seed}")
    return violations


def build_grid(spec: SweepSpec) -> List[GridTuple]:
    """Full cartesian product, lexicographic in (beta_c, beta_tau, C, I)."""
    violations = sweep_violations(spec)
    if violations:
        raise ConfigValidationError(violations)
    return list(itertools.product(
        spec.beta_c_values,
        spec.beta_tau_values,
        spec.capacity_values,
        spec.interval_values,
    ))


def replication_seeds(spec: SweepSpec, grid_size: int) -> np.ndarray:
    """Seeds indexed [tuple, replication]; raises if two coincide."""
    seeds = np.array(
        [[mix_seed(spec.master_seed, i, r) for r in range(spec.replications)] for i in range(grid_size)],
        dtype=np.uint64,
    ).reshape(grid_size, spec.replications)
    if np.unique(seeds).size != seeds.size:
        raise RuntimeError(f"seed collision in sweep with master seed {spec.master_seed}")
    return seeds


def scenario_config(base: SimulationConfig, params: GridTuple, seed: int) -> SimulationConfig:
    beta_c, beta_tau, capacity, interval = params
    return base.with_scenario(
        beta_c=beta_c,
        beta_tau=beta_tau,
        train_capacity=capacity,
        train_interval=interval,
        seed=int(seed),
    )


def _run_tuple(index: int, params: GridTuple, base: SimulationConfig, seeds: List[int]):
    """Worker: every replication of one tuple. Errors come back as text."""
    try:
        scalars = []
        for seed in seeds:
            result, _ = run(scenario_config(base, params, seed))
            scalars.append(result_scalars(result))
        return index, scalars, None
    except Exception as exc:  # reported by the parent with the tuple identified
        return index, None, f"{type(exc).__name__}: {exc}"


def aggregate(params: GridTuple, scalars: List[Dict[str, float]]) -> SweepRow:
    """Mean and sample standard deviation of each indicator over replications."""
    frame = pd.DataFrame(scalars, columns=SCALAR_INDICATORS).astype(float)
    means = frame.mean()
    sds = frame.std(ddof=1).fillna(0.0)
    beta_c, beta_tau, capacity, interval = params
    return SweepRow(
        beta_c=beta_c,
        beta_tau=beta_tau,
        train_capacity=capacity,
        train_interval=interval,
        means={name: float(means[name]) for name in SCALAR_INDICATORS},
        sds={name: float(sds[name]) for name in SCALAR_INDICATORS},
        replications=len(scalars),
    )


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> List[SweepRow]:
    """
    Run every (tuple, replication) and aggregate per tuple in grid order.

    Raises:
        ValueError: parallelism < 1
        ConfigValidationError: empty lists or replications < 1
        SweepRunError: a tuple yields an invalid config or a run fails
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    grid = build_grid(spec)
    seeds = replication_seeds(spec, len(grid))

    for index, params in enumerate(grid):
        violations = config_violations(scenario_config(spec.base, params, 0))
        if violations:
            raise SweepRunError(index, params, "; ".join(violations))

    logger.info(
        "[SWEEP] %d tuples x %d replications = %d runs, parallelism=%d",
        len(grid), spec.replications, len(grid) * spec.replications, parallelism,
    )
    outputs = Parallel(n_jobs=parallelism)(
        delayed(_run_tuple)(index, params, spec.base, [int(s) for s in seeds[index]])
        for index, params in enumerate(grid)
    )

    rows: Dict[int, SweepRow] = {}
    for index, scalars, error in outputs:
        if error is not None:
            raise SweepRunError(index, grid[index], error)
        rows[index] = aggregate(grid[index], scalars)
    logger.info("[SWEEP] done: %d rows", len(rows))
    return [rows[i] for i in sorted(rows)]


# ---------------------------------------------------------
# CSV
# ---------------------------------------------------------

def sweep_columns() -> List[str]:
    columns = list(PARAMETER_COLUMNS)
    for name in SCALAR_INDICATORS:
        columns += [f"{name}_mean", f"{name}_sd"]
    return columns + ["replications"]


def sweep_frame(rows: List[SweepRow]) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {
            "beta_c": row.beta_c,
            "beta_tau": row.beta_tau,
            "train_capacity": row.train_capacity,
            "train_interval": row.train_interval,
        }
        for name in SCALAR_INDICATORS:
            record[f"{name}_mean"] = row.means[name]
            record[f"{name}_sd"] = row.sds[name]
        record["replications"] = row.replications
        records.append(record)
    return pd.DataFrame(records, columns=sweep_columns())


def write_sweep_csv(rows: List[SweepRow], path: Union[str, Path]) -> Path:
    return write_text_atomic(path, format_csv(sweep_frame(rows)))
