"""
Shot-complexity bound endpoints
"""
import logging
from typing import Any

from fastapi import APIRouter, Query

from app.schemas.bounds import BoundInputs, BoundsReport
from app.services import bounds_service

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/bounds",
    tags=["Bounds"]
)


@router.get(
    "",
    response_model=BoundsReport,
    summary="Compare shot complexity of the two heads",
    description="Evaluates the Hoeffding-style bounds, crossover thresholds and the exact majority-vote oracle"
)
async def get_bounds(
    p: float = Query(..., description="Single-shot correct-class probability"),
    delta: float = Query(..., description="Top-two score margin"),
    n_classes: int = Query(..., description="Class count K"),
    target_error: float = Query(..., description="Target decision error"),
    lipschitz: float = Query(1.0, description="Lipschitz constant of the score map"),
    shots: int = Query(1, description="Shot count N"),
) -> Any:
    """
    Domain violations surface as DOMAIN_ERROR responses through the
    application's LabError handler.
    """
    inputs = BoundInputs(
        p=p,
        delta_margin=delta,
        lipschitz=lipschitz,
        n_classes=n_classes,
        target_error=target_error,
        shots=shots,
    )
    return bounds_service.compute_report(inputs)
