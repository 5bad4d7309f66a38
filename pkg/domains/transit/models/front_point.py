from pydantic import BaseModel, Field


class FrontPoint(BaseModel):
    """
    One row of the optimizer's front CSV.
    """

    beta_c: float
    beta_tau: float
    rer_congestion: float = Field(..., description="First objective (minimized)")
    other_congestion: float = Field(..., description="Second objective (minimized)")
    rank: int = Field(0, description="Non-domination rank, 0 = Pareto front")
    crowding: float = Field(..., description="Crowding distance; inf at the front boundary")
