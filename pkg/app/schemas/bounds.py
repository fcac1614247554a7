"""
Pydantic schemas for shot-complexity bound inputs and reports
"""
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class BoundInputs(BaseModel):
    """Inputs to the bound calculators; ranges are enforced by the calculators themselves"""
    p: float = Field(..., description="Single-shot correct-class probability")
    delta_margin: float = Field(..., description="Top-two score margin Delta")
    lipschitz: float = Field(default=1.0, description="Lipschitz constant L of the score map")
    n_classes: int = Field(..., description="Class count K")
    target_error: float = Field(..., description="Target decision error delta")
    shots: int = Field(default=1, description="Shot count N")

    model_config = ConfigDict(frozen=True)

    @property
    def lipschitz_source(self) -> str:
        return "identity" if self.lipschitz == 1.0 else "user-supplied"


class BoundsReport(BaseModel):
    """Both heads side by side at the given inputs"""
    inputs: BoundInputs
    yomo_error_bound: float
    vanilla_error_bound: float
    yomo_shots: int
    vanilla_shots: int
    yomo_single_shot_error: float
    vanilla_single_shot_error_bound: float
    fewer_shots_threshold: float
    smaller_delta_threshold: Optional[float] = None
    smaller_delta_vacuous: bool = False
    single_shot_threshold: float
    exact_majority_error: float
    exact_majority_shots: int
    lipschitz_source: str = "identity"


class BoundsRow(BaseModel):
    """One line of the bounds CSV"""
    quantity: str
    model: str
    value: str
