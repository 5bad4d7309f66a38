"""
engine/state.py

Mutable run state of one simulation.

Users are stored column-wise: a UserBlock holds parallel numpy arrays (id,
entry time, shifted flag, countdown, target mode) for every user of one
container. A user's state is implied by the container holding it:

- platform            -> waiting for a train
- transferring        -> walking to an alternative mode (target, remaining)
- pending[mode]       -> waiting to enter a full mode queue (FIFO)
- queues[mode]        -> travelling on an alternative mode (remaining)
- train.passengers    -> on board a train
- arrived             -> trip completed (terminal)

Blocks are never mutated in place; every phase builds new arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from engine.models import ALL_MODES, ALTERNATIVE_MODES, ModeId, SimulationConfig
from engine.rng import Rng

MODE_INDEX: Dict[ModeId, int] = {mode: i for i, mode in enumerate(ALL_MODES)}

# Child stream indices of a run seed
ARRIVAL_STREAM = {mode: i for i, mode in enumerate(ALL_MODES)}
CHOICE_STREAM = 6
TARGET_STREAM = 7
RESHIFT_CHOICE_STREAM = 8
RESHIFT_TARGET_STREAM = 9


# ============================================================================
# Users
# ============================================================================

@dataclass(frozen=True)
class UserBlock:
    ids: np.ndarray
    entry_time: np.ndarray
    shifted: np.ndarray
    remaining: np.ndarray
    target: np.ndarray

    @classmethod
    def empty(cls) -> "UserBlock":
        return cls(
            ids=np.empty(0, dtype=np.int64),
            entry_time=np.empty(0, dtype=np.int64),
            shifted=np.empty(0, dtype=bool),
            remaining=np.empty(0, dtype=np.int64),
            target=np.empty(0, dtype=np.int8),
        )

    @classmethod
    def new(cls, first_id: int, count: int, entry_time: int, mode: ModeId) -> "UserBlock":
        """count fresh users entering at entry_time on mode."""
        return cls(
            ids=np.arange(first_id, first_id + count, dtype=np.int64),
            entry_time=np.full(count, entry_time, dtype=np.int64),
            shifted=np.zeros(count, dtype=bool),
            remaining=np.zeros(count, dtype=np.int64),
            target=np.full(count, MODE_INDEX[mode], dtype=np.int8),
        )

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def select(self, index) -> "UserBlock":
        """Rows picked by a boolean mask or index array, order preserved."""
        return UserBlock(
            ids=self.ids[index],
            entry_time=self.entry_time[index],
            shifted=self.shifted[index],
            remaining=self.remaining[index],
            target=self.target[index],
        )

    def split(self, k: int) -> Tuple["UserBlock", "UserBlock"]:
        """First k users (FIFO head) and the rest."""
        return self.select(slice(0, k)), self.select(slice(k, None))

    def with_columns(self, **columns) -> "UserBlock":
        return replace(self, **columns)

    @staticmethod
    def concat(*blocks: "UserBlock") -> "UserBlock":
        blocks = tuple(b for b in blocks if len(b))
        if not blocks:
            return UserBlock.empty()
        if len(blocks) == 1:
            return blocks[0]
        return UserBlock(
            ids=np.concatenate([b.ids for b in blocks]),
            entry_time=np.concatenate([b.entry_time for b in blocks]),
            shifted=np.concatenate([b.shifted for b in blocks]),
            remaining=np.concatenate([b.remaining for b in blocks]),
            target=np.concatenate([b.target for b in blocks]),
        )


class ArrivalLog:
    """Completed trips, appended in chunks and materialized on demand."""

    COLUMNS = ["id", "entry_time", "arrival_time", "mode", "shifted"]

    def __init__(self):
        self._chunks: List[Tuple[UserBlock, int, ModeId]] = []
        self._count = 0
        self._frame: Optional[pd.DataFrame] = None

    def record(self, block: UserBlock, arrival_time: int, mode: ModeId) -> None:
        if not len(block):
            return
        self._chunks.append((block, arrival_time, mode))
        self._count += len(block)
        self._frame = None

    @classmethod
    def from_pairs(cls, pairs) -> "ArrivalLog":
        """Build a log from (entry_time, arrival_time) pairs (tests, hand traces)."""
        log = cls()
        for i, (entry, arrival) in enumerate(pairs):
            block = UserBlock.new(i, 1, entry, ModeId.rer)
            log.record(block, arrival, ModeId.rer)
        return log

    def __len__(self) -> int:
        return self._count

    def travel_times(self) -> np.ndarray:
        if not self._chunks:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([t - block.entry_time for block, t, _ in self._chunks])

    def to_frame(self) -> pd.DataFrame:
        if self._frame is not None:
            return self._frame
        blocks = [block for block, _, _ in self._chunks]
        merged = UserBlock.concat(*blocks)
        self._frame = pd.DataFrame({
            "id": merged.ids,
            "entry_time": merged.entry_time,
            "arrival_time": np.concatenate(
                [np.full(len(b), t, dtype=np.int64) for b, t, _ in self._chunks]
            ) if self._chunks else np.empty(0, dtype=np.int64),
            "mode": pd.Series(
                [m.value for b, _, m in self._chunks for _ in range(len(b))], dtype="object"
            ),
            "shifted": merged.shifted,
        })
        return self._frame


# ============================================================================
# Trains
# ============================================================================

class TrainPosition(str, Enum):
    station = "station"
    segment = "segment"
    terminus = "terminus"


@dataclass
class Train:
    id: int
    position: TrainPosition = TrainPosition.station
    slot: int = -1
    dwell_elapsed: int = 0
    departing: bool = False
    passengers: UserBlock = field(default_factory=UserBlock.empty)

    @property
    def onboard(self) -> int:
        return len(self.passengers)


# ============================================================================
# Run state
# ============================================================================

@dataclass
class Counters:
    created: int = 0
    shifted: int = 0
    boarded: int = 0
    alighted: int = 0
    created_by_mode: Dict[ModeId, int] = field(default_factory=lambda: {m: 0 for m in ALL_MODES})
    # Direct arrivals plus shifts into each alternative mode
    entered_by_mode: Dict[ModeId, int] = field(default_factory=lambda: {m: 0 for m in ALTERNATIVE_MODES})


@dataclass
class SimState:
    config: SimulationConfig
    seed: int
    clock: int = 0
    platform: UserBlock = field(default_factory=UserBlock.empty)
    trains: List[Train] = field(default_factory=list)
    transferring: UserBlock = field(default_factory=UserBlock.empty)
    pending: Dict[ModeId, UserBlock] = field(default_factory=lambda: {m: UserBlock.empty() for m in ALTERNATIVE_MODES})
    queues: Dict[ModeId, UserBlock] = field(default_factory=lambda: {m: UserBlock.empty() for m in ALTERNATIVE_MODES})
    arrived: ArrivalLog = field(default_factory=ArrivalLog)
    traces: Optional[np.ndarray] = None
    boarded_by_step: Optional[np.ndarray] = None
    streams: Dict[object, Rng] = field(default_factory=dict)
    counters: Counters = field(default_factory=Counters)
    train_backlog: int = 0
    next_user_id: int = 0
    next_train_id: int = 0
    audit: bool = False

    def station_train(self) -> Optional[Train]:
        for train in self.trains:
            if train.position == TrainPosition.station:
                return train
        return None

    def onboard_total(self) -> int:
        return sum(train.onboard for train in self.trains)

    def population(self) -> int:
        """Users currently held in any container, arrived included."""
        return (
            len(self.platform)
            + len(self.transferring)
            + sum(len(b) for b in self.pending.values())
            + sum(len(b) for b in self.queues.values())
            + self.onboard_total()
            + len(self.arrived)
        )
