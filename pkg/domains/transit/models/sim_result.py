from pydantic import BaseModel, Field
from typing import Dict

from domains.transit.models.mode_id import ModeId


class SimResult(BaseModel):
    """
    Run-level indicators of one simulation.
    This is what a run, a sweep replication and an optimizer evaluation return.
    """

    # Travel time over completed trips; NaN when nothing completed
    avg_travel_time: float = Field(
        ..., description="Mean (arrival - entry) over completed trips, minutes"
    )

    # Congestion: time-averaged occupancy / capacity
    congestion: Dict[ModeId, float] = Field(
        default_factory=dict,
        description="Per-mode congestion; platform-based for the RER, queue-based otherwise",
    )
    rer_congestion: float = Field(0.0, description="Platform occupancy / platform capacity, time-averaged")
    avg_congestion_other: float = Field(
        0.0, description="Mean congestion of the five alternative modes"
    )

    # Trip accounting
    completed: int = Field(0, description="Users who reached the end of the segment")
    uncompleted: int = Field(0, description="Users still travelling or waiting at the horizon")
    total_created: int = Field(0, description="Users who entered the segment")
    shifted: int = Field(0, description="Shift decisions taken over the run")
    boarded: int = Field(0, description="Users who boarded a train")
