"""
Noise preset endpoints
"""
from typing import Any

from fastapi import APIRouter

from app.quantum.noise import presets
from app.schemas.base import ListResponse

router = APIRouter(
    prefix="/noise",
    tags=["Noise"]
)


@router.get(
    "/presets",
    response_model=ListResponse,
    summary="Hardware depolarizing presets"
)
async def get_noise_presets() -> Any:
    data = [preset.model_dump() for preset in presets()]
    return ListResponse(
        success=True,
        message="Noise presets",
        data=data,
        total_count=len(data),
    )
