"""
engine/simulation.py

One simulation run as a sequence of one-minute steps.

Each step applies, in this order:
1. spawn_arrivals       - Poisson arrivals per mode
2. evaluate_choices     - platform users may shift to an alternative mode
3. train_phase          - train entry, boarding, alighting at the terminus
4. advance_trains       - trains move one slot if the next one is free
5. advance_mode_queues  - alternative-mode queues, transfers, admissions

then records the occupancy trace row and advances the clock.
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from domains.transit.models.sim_result import SimResult
from engine.choice import (
    cumulative_shares,
    delta_utility,
    perceived_congestion,
    perceived_time,
    pick_alternatives,
    shift_probabilities,
    signed_utility,
)
from engine.config import AUDIT_ENABLED
from engine.indicators import TRACE_COLUMNS, summarize
from engine.models import (
    ALL_MODES,
    ALTERNATIVE_MODES,
    BehaviouralParams,
    ModeId,
    SimulationConfig,
    validate_config,
)
from engine.rng import Rng
from engine.state import (
    ARRIVAL_STREAM,
    CHOICE_STREAM,
    MODE_INDEX,
    RESHIFT_CHOICE_STREAM,
    RESHIFT_TARGET_STREAM,
    TARGET_STREAM,
    SimState,
    Train,
    TrainPosition,
    UserBlock,
)

logger = logging.getLogger(__name__)


class InvariantViolation(RuntimeError):
    """Raised by the audit when a structural invariant breaks."""

    def __init__(self, phase: str, clock: int, detail: str):
        self.phase = phase
        self.clock = clock
        super().__init__(f"[{phase} @ t={clock}] {detail}")


class ConservationError(InvariantViolation):
    """Created users no longer match the users held by the containers."""


# ============================================================================
# Initialization
# ============================================================================

def init_state(config: SimulationConfig, seed: Optional[int] = None, audit: Optional[bool] = None) -> SimState:
    """
    Fresh state at clock 0: empty platform, empty segment, first train due at t = 0.

    Raises:
        ConfigValidationError: listing every violated invariant
    """
    validate_config(config)
    run_seed = config.seed if seed is None else int(seed)
    streams = {mode: Rng.child(run_seed, ARRIVAL_STREAM[mode]) for mode in ALL_MODES}
    for index in (CHOICE_STREAM, TARGET_STREAM, RESHIFT_CHOICE_STREAM, RESHIFT_TARGET_STREAM):
        streams[index] = Rng.child(run_seed, index)
    return SimState(
        config=config,
        seed=run_seed,
        traces=np.zeros((config.horizon, len(TRACE_COLUMNS)), dtype=np.int64),
        boarded_by_step=np.zeros(config.horizon, dtype=np.int64),
        streams=streams,
        audit=AUDIT_ENABLED if audit is None else audit,
    )


# ============================================================================
# Phases
# ============================================================================

def spawn_arrivals(state: SimState) -> None:
    """Poisson arrivals for every mode, drawn in fixed mode order."""
    for mode in ALL_MODES:
        rate = state.config.modes[mode].arrival_rate
        count = state.streams[mode].poisson(rate)
        if count == 0:
            continue
        block = UserBlock.new(state.next_user_id, count, state.clock, mode)
        state.next_user_id += count
        state.counters.created += count
        state.counters.created_by_mode[mode] += count
        if mode == ModeId.rer:
            state.platform = UserBlock.concat(state.platform, block)
        else:
            state.pending[mode] = UserBlock.concat(state.pending[mode], block)
            state.counters.entered_by_mode[mode] += count


def wait_to_next_train(state: SimState) -> int:
    """
    Minutes until a train can be boarded at the station.

    0 while a train is boarding or one enters this minute; a departing train
    still holding the station delays the next one by at least a minute.
    """
    interval = state.config.service.train_interval
    phase = state.clock % interval
    due_now = state.train_backlog > 0 or phase == 0
    station = state.station_train()
    if station is not None and not station.departing:
        return 0
    if station is None:
        return 0 if due_now else interval - phase
    return 1 if due_now else interval - phase


def _start_transfers(state: SimState, movers: UserBlock, target_index: np.ndarray) -> None:
    movers = movers.with_columns(
        shifted=np.ones(len(movers), dtype=bool),
        remaining=np.full(len(movers), state.config.transfer_time, dtype=np.int64),
        target=target_index.astype(np.int8),
    )
    state.transferring = UserBlock.concat(state.transferring, movers)
    state.counters.shifted += len(movers)
    counts = np.bincount(target_index, minlength=len(ALL_MODES))
    for mode in ALTERNATIVE_MODES:
        state.counters.entered_by_mode[mode] += int(counts[MODE_INDEX[mode]])


def evaluate_choices(state: SimState, params: BehaviouralParams) -> None:
    """
    Every waiting user weighs staying against shifting.

    Congestion is a snapshot of the platform at the start of the phase; the
    decision draws are made in platform (FIFO) order.
    """
    waiting = len(state.platform)
    if waiting:
        c = perceived_congestion(waiting, state.config.service.platform_capacity)
        tau = perceived_time(state.clock - state.platform.entry_time, wait_to_next_train(state))
        p = shift_probabilities(signed_utility(params, delta_utility(params, c, tau)))
        shift = state.streams[CHOICE_STREAM].uniforms(waiting) < p
        movers_count = int(shift.sum())
        if movers_count:
            movers = state.platform.select(shift)
            state.platform = state.platform.select(~shift)
            cumulative = cumulative_shares(state.config.shares())
            picks = pick_alternatives(cumulative, state.streams[TARGET_STREAM].uniforms(movers_count))
            # ALL_MODES index = alternative index + 1
            _start_transfers(state, movers, picks + 1)
    if state.config.allow_reshift:
        _reshift_pending(state, params)


def _reshift_pending(state: SimState, params: BehaviouralParams) -> None:
    """Shifted users stuck before a full queue reconsider and pick another alternative."""
    shares = state.config.shares()
    for mode in ALTERNATIVE_MODES:
        pending = state.pending[mode]
        candidates = np.flatnonzero(pending.shifted)
        if candidates.size == 0:
            continue
        others = [m for m in ALTERNATIVE_MODES if m != mode]
        total = sum(shares[m] for m in others)
        if total <= 0:
            continue
        spec = state.config.modes[mode]
        c = (len(state.queues[mode]) + len(pending)) / spec.queue_capacity
        tau = perceived_time(state.clock - pending.entry_time[candidates], 0)
        p = shift_probabilities(signed_utility(params, delta_utility(params, c, tau)))
        shift = state.streams[RESHIFT_CHOICE_STREAM].uniforms(candidates.size) < p
        if not shift.any():
            continue
        leaving = np.zeros(len(pending), dtype=bool)
        leaving[candidates[shift]] = True
        movers = pending.select(leaving)
        state.pending[mode] = pending.select(~leaving)
        cumulative = np.cumsum([shares[m] / total for m in others])
        cumulative[-1] = 1.0
        picks = pick_alternatives(cumulative, state.streams[RESHIFT_TARGET_STREAM].uniforms(len(movers)))
        target_index = np.array([MODE_INDEX[others[i]] for i in picks], dtype=np.int64)
        _start_transfers(state, movers, target_index)


def train_phase(state: SimState) -> None:
    """
    (a) a due train enters a free station, (b) the station train boards FIFO
    from the platform, (c) trains at the terminus alight everyone.
    """
    service = state.config.service
    if state.clock % service.train_interval == 0:
        state.train_backlog += 1

    station = state.station_train()
    if station is None and state.train_backlog > 0:
        station = Train(id=state.next_train_id)
        state.next_train_id += 1
        state.train_backlog -= 1
        state.trains.append(station)

    if station is not None and not station.departing:
        k = min(service.boarding_rate, service.train_capacity - station.onboard, len(state.platform))
        if k > 0:
            boarding, state.platform = state.platform.split(k)
            station.passengers = UserBlock.concat(station.passengers, boarding)
            state.counters.boarded += k
            state.boarded_by_step[state.clock] += k
        station.dwell_elapsed += 1
        if station.onboard >= service.train_capacity or station.dwell_elapsed >= service.max_dwell:
            station.departing = True

    for train in state.trains:
        if train.position == TrainPosition.terminus and train.onboard:
            state.arrived.record(train.passengers, state.clock, ModeId.rer)
            state.counters.alighted += train.onboard
            train.passengers = UserBlock.empty()


def advance_trains(state: SimState) -> None:
    """Move trains from the terminus side back to the station, one slot at most."""
    last_slot = state.config.service.segment_slots - 1
    state.trains = [t for t in state.trains if t.position != TrainPosition.terminus]
    on_segment = sorted(
        (t for t in state.trains if t.position == TrainPosition.segment),
        key=lambda t: t.slot,
        reverse=True,
    )
    occupied = {t.slot for t in on_segment}
    for train in on_segment:
        if train.slot == last_slot:
            occupied.discard(train.slot)
            train.position = TrainPosition.terminus
            train.slot = -1
        elif train.slot + 1 not in occupied:
            occupied.discard(train.slot)
            train.slot += 1
            occupied.add(train.slot)

    station = state.station_train()
    if station is not None and station.departing and 0 not in occupied:
        station.position = TrainPosition.segment
        station.slot = 0


def advance_mode_queues(state: SimState) -> None:
    """
    Per alternative mode in fixed order:
    (a) travelling users count down and arrive at 0,
    (b) transfers towards the mode finish and join its pending FIFO,
    (c) pending users enter the queue while it is below capacity.
    """
    for mode in ALTERNATIVE_MODES:
        spec = state.config.modes[mode]
        index = MODE_INDEX[mode]

        queue = state.queues[mode]
        if len(queue):
            remaining = queue.remaining - 1
            done = remaining <= 0
            queue = queue.with_columns(remaining=remaining)
            if done.any():
                state.arrived.record(queue.select(done), state.clock, mode)
                queue = queue.select(~done)

        transferring = state.transferring
        if len(transferring):
            mine = transferring.target == index
            if mine.any():
                ready = mine & (transferring.remaining <= 0)
                remaining = np.where(mine & ~ready, transferring.remaining - 1, transferring.remaining)
                transferring = transferring.with_columns(remaining=remaining)
                if ready.any():
                    state.pending[mode] = UserBlock.concat(state.pending[mode], transferring.select(ready))
                    transferring = transferring.select(~ready)
                state.transferring = transferring

        pending = state.pending[mode]
        room = spec.queue_capacity - len(queue)
        admitted = min(room, len(pending))
        if admitted > 0:
            entering, state.pending[mode] = pending.split(admitted)
            entering = entering.with_columns(
                remaining=np.full(admitted, spec.traversal_time, dtype=np.int64),
                target=np.full(admitted, index, dtype=np.int8),
            )
            queue = UserBlock.concat(queue, entering)
        state.queues[mode] = queue


# ============================================================================
# Audit
# ============================================================================

def audit_state(state: SimState, phase: str, end_of_step: bool = False) -> None:
    """Check conservation and structural invariants; raise on the first breach."""
    held = state.population()
    if held != state.counters.created:
        raise ConservationError(phase, state.clock, f"created={state.counters.created} held={held}")

    service = state.config.service
    stations = [t for t in state.trains if t.position == TrainPosition.station]
    if len(stations) > 1:
        raise InvariantViolation(phase, state.clock, f"{len(stations)} trains at the station")
    slots = [t.slot for t in state.trains if t.position == TrainPosition.segment]
    if len(slots) != len(set(slots)):
        raise InvariantViolation(phase, state.clock, f"shared segment slot in {sorted(slots)}")
    for train in state.trains:
        if train.onboard > service.train_capacity:
            raise InvariantViolation(phase, state.clock, f"train {train.id} carries {train.onboard}")
    if state.boarded_by_step[min(state.clock, state.config.horizon - 1)] > service.boarding_rate:
        raise InvariantViolation(phase, state.clock, "boarding rate exceeded")
    if end_of_step:
        for mode in ALTERNATIVE_MODES:
            size = len(state.queues[mode])
            if size > state.config.modes[mode].queue_capacity:
                raise InvariantViolation(phase, state.clock, f"{mode.value} queue holds {size}")


# ============================================================================
# Stepping
# ============================================================================

PHASES = (
    ("spawn_arrivals", spawn_arrivals),
    ("evaluate_choices", lambda s: evaluate_choices(s, s.config.behavioural)),
    ("train_phase", train_phase),
    ("advance_trains", advance_trains),
    ("advance_mode_queues", advance_mode_queues),
)


def record_trace(state: SimState) -> None:
    row = [
        state.clock,
        len(state.platform),
        state.onboard_total(),
        *(len(state.queues[m]) + len(state.pending[m]) for m in ALTERNATIVE_MODES),
        len(state.arrived),
    ]
    state.traces[state.clock] = row


def step(state: SimState, config: Optional[SimulationConfig] = None) -> None:
    config = config or state.config
    if state.clock >= config.horizon:
        raise ValueError(f"clock {state.clock} already at horizon {config.horizon}")
    for name, phase in PHASES:
        phase(state)
        if state.audit:
            audit_state(state, name, end_of_step=(name == "advance_mode_queues"))
    record_trace(state)
    state.clock += 1


def run(config: SimulationConfig, audit: Optional[bool] = None) -> Tuple[SimResult, SimState]:
    """Full run until the horizon; returns indicators and the final state."""
    state = init_state(config, audit=audit)
    while state.clock < config.horizon:
        step(state, config)
    result = summarize(state, config)
    logger.debug(
        "[SIM] seed=%d created=%d shifted=%d completed=%d",
        state.seed,
        result.total_created,
        result.shifted,
        result.completed,
    )
    return result, state
