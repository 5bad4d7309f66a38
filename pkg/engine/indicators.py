"""
engine/indicators.py

Run-level indicators: average travel time over completed trips and
time-averaged congestion per mode.

Congestion of an alternative mode is (queue + pending occupancy) / queue
capacity averaged over steps; congestion of the RER is platform occupancy /
platform capacity averaged over steps. Occupancies are integers, so the time
average is one exact integer sum divided once, independent of row order.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, List, Mapping, Union

import numpy as np
import pandas as pd

from domains.transit.models.sim_result import SimResult
from engine.models import (
    ALTERNATIVE_MODES,
    CongestionWeighting,
    ModeId,
    SimulationConfig,
)
from engine.state import ArrivalLog, SimState

TRACE_COLUMNS = ["t", "platform", "rer_onboard", "metro", "bus", "taxi", "bike", "walk", "arrived"]

RESULT_COLUMNS = [
    "seed",
    "beta_c",
    "beta_tau",
    "train_interval",
    "train_capacity",
    "avg_travel_time",
    "rer_congestion",
    "metro_congestion",
    "bus_congestion",
    "taxi_congestion",
    "bike_congestion",
    "walk_congestion",
    "avg_congestion_other",
    "completed",
    "uncompleted",
]

# Scalars aggregated by sweeps (mean / sd columns)
SCALAR_INDICATORS = RESULT_COLUMNS[5:] + ["total_created"]

FLOAT_FORMAT = "%.6g"
NA_REP = "NaN"


def average_travel_time(arrived: Union[ArrivalLog, pd.DataFrame]) -> float:
    """Mean trip duration of completed trips, NaN when none completed."""
    if isinstance(arrived, pd.DataFrame):
        times = (arrived["arrival_time"] - arrived["entry_time"]).to_numpy()
    else:
        times = arrived.travel_times()
    if times.size == 0:
        return math.nan
    return int(times.sum()) / int(times.size)


def traces_frame(state: SimState) -> pd.DataFrame:
    """Per-step occupancy rows recorded so far."""
    rows = state.traces[: state.clock] if state.traces is not None else np.empty((0, len(TRACE_COLUMNS)))
    return pd.DataFrame(rows, columns=TRACE_COLUMNS).astype("int64")


def mode_congestion(traces: pd.DataFrame, config: SimulationConfig) -> Dict[ModeId, float]:
    steps = len(traces)
    congestion = {ModeId.rer: 0.0, **{mode: 0.0 for mode in ALTERNATIVE_MODES}}
    if steps == 0:
        return congestion
    congestion[ModeId.rer] = int(traces["platform"].sum()) / (steps * config.service.platform_capacity)
    for mode in ALTERNATIVE_MODES:
        capacity = config.modes[mode].queue_capacity
        congestion[mode] = int(traces[mode.value].sum()) / (steps * capacity)
    return congestion


def other_congestion(
    congestion: Mapping[ModeId, float],
    weighting: CongestionWeighting = CongestionWeighting.unweighted,
    demand: Mapping[ModeId, int] | None = None,
) -> float:
    values = [congestion[mode] for mode in ALTERNATIVE_MODES]
    if weighting == CongestionWeighting.demand and demand:
        weights = [demand.get(mode, 0) for mode in ALTERNATIVE_MODES]
        if sum(weights) > 0:
            return float(np.average(values, weights=weights))
    return sum(values) / len(values)


def summarize(state: SimState, config: SimulationConfig) -> SimResult:
    congestion = mode_congestion(traces_frame(state), config)
    completed = len(state.arrived)
    created = state.counters.created
    return SimResult(
        avg_travel_time=average_travel_time(state.arrived),
        congestion=congestion,
        rer_congestion=congestion[ModeId.rer],
        avg_congestion_other=other_congestion(
            congestion, config.congestion_weighting, state.counters.entered_by_mode
        ),
        completed=completed,
        uncompleted=created - completed,
        total_created=created,
        shifted=state.counters.shifted,
        boarded=state.counters.boarded,
    )


# ---------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------

def result_scalars(result: SimResult) -> Dict[str, float]:
    scalars = {
        "avg_travel_time": result.avg_travel_time,
        "rer_congestion": result.rer_congestion,
    }
    for mode in ALTERNATIVE_MODES:
        scalars[f"{mode.value}_congestion"] = result.congestion.get(mode, 0.0)
    scalars["avg_congestion_other"] = result.avg_congestion_other
    scalars["completed"] = result.completed
    scalars["uncompleted"] = result.uncompleted
    scalars["total_created"] = result.total_created
    return scalars


def result_row(result: SimResult, config: SimulationConfig) -> Dict[str, object]:
    scalars = result_scalars(result)
    row: Dict[str, object] = {
        "seed": config.seed,
        "beta_c": config.behavioural.beta_c,
        "beta_tau": config.behavioural.beta_tau,
        "train_interval": config.service.train_interval,
        "train_capacity": config.service.train_capacity,
    }
    row.update({name: scalars[name] for name in RESULT_COLUMNS[5:]})
    return row


def results_frame(rows: Iterable[Dict[str, object]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=RESULT_COLUMNS)


def format_csv(frame: pd.DataFrame) -> str:
    """Header plus rows, 6 significant digits, NaN spelled out, trailing newline."""
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=NA_REP, lineterminator="\n")
