from pydantic import BaseModel, Field
from typing import Dict


class SweepRow(BaseModel):
    """
    One grid point of a parameter sweep with replication statistics.
    """

    # Grid coordinates
    beta_c: float
    beta_tau: float
    train_capacity: int
    train_interval: int

    # Aggregates over replications, keyed by indicator name
    means: Dict[str, float] = Field(default_factory=dict)
    sds: Dict[str, float] = Field(
        default_factory=dict, description="Sample standard deviation; 0 for a single replication"
    )
    replications: int = Field(..., description="Runs aggregated into this row")
