"""
Pydantic schemas for result rows and run registry responses
"""
from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.base import ListResponse
from app.services.base import format_float, format_shots

EVALUATION_COLUMNS = (
    "run_id", "head", "n_q", "N_b", "tau", "noise_name",
    "shots", "repeat_count", "accuracy", "std_err", "seed",
)
LOSS_TRACE_COLUMNS = ("epoch", "ce", "ps", "entropy", "total", "test_loss")
SWEEP_COLUMNS = ("axis", "axis_value") + EVALUATION_COLUMNS + ("error",)


class EvaluationRow(BaseModel):
    """One accuracy cell"""
    run_id: str
    head: str
    n_q: int
    n_blocks: int = Field(..., description="Ansatz block count N_b")
    tau: float
    noise_name: str
    shots: Optional[int] = Field(None, description="None means infinite shots")
    repeat_count: int
    accuracy: float
    std_err: float
    seed: int

    def csv_values(self) -> List[str]:
        return [
            self.run_id, self.head, str(self.n_q), str(self.n_blocks), format_float(self.tau),
            self.noise_name, format_shots(self.shots), str(self.repeat_count),
            format_float(self.accuracy), format_float(self.std_err), str(self.seed),
        ]


class LossTraceRow(BaseModel):
    epoch: int
    ce: float
    ps: float
    entropy: float
    total: float
    test_loss: Optional[float] = None

    def csv_values(self) -> List[str]:
        return [
            str(self.epoch), format_float(self.ce), format_float(self.ps),
            format_float(self.entropy), format_float(self.total), format_float(self.test_loss),
        ]


class SweepRow(BaseModel):
    """Evaluation cell tagged with its sweep axis; failed cells carry only the error"""
    axis: str
    axis_value: str
    evaluation: Optional[EvaluationRow] = None
    error: Optional[str] = None

    def csv_values(self) -> List[str]:
        body = self.evaluation.csv_values() if self.evaluation else [""] * len(EVALUATION_COLUMNS)
        return [self.axis, self.axis_value] + body + [self.error or ""]


class TrainingRunResponse(BaseModel):
    """Schema for run registry API responses"""
    id: int
    run_id: str
    head: str
    n_q: int
    n_blocks: int
    n_classes: int
    seed: int
    epochs: int
    final_loss: Optional[float]
    checkpoint_path: Optional[str]
    updated_at: Optional[datetime]

    model_config = ConfigDict(
        from_attributes=True,
        json_encoders={
            datetime: lambda v: v.isoformat() if v else None
        }
    )


class EvaluationRecordResponse(BaseModel):
    id: int
    run_id: str
    noise_name: str
    shots: str
    repeat_count: int
    accuracy: float
    std_err: float
    seed: int
    updated_at: Optional[datetime]

    model_config = ConfigDict(from_attributes=True)


class TrainingRunListResponse(ListResponse):
    """Response schema for the run list endpoint"""
    pass


class EvaluationListResponse(ListResponse):
    pass
