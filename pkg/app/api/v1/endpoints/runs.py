"""
Run registry endpoints
"""
import logging
from typing import Any

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session

from app.db.database import get_db
from app.schemas.results import EvaluationListResponse, TrainingRunListResponse, TrainingRunResponse
from app.services import results_service

logger = logging.getLogger(__name__)

router = APIRouter(
    prefix="/runs",
    tags=["Runs"]
)


@router.get(
    "",
    response_model=TrainingRunListResponse,
    summary="List trained runs",
    description="Returns every training run recorded in the registry"
)
async def get_runs(db: Session = Depends(get_db)) -> Any:
    try:
        runs = results_service.get_all_runs(db)
        data = [run.to_dict() for run in runs]

        last_updated = None
        update_times = [r.updated_at for r in runs if r.updated_at]
        if update_times:
            last_updated = max(update_times)

        return TrainingRunListResponse(
            success=True,
            message="Runs fetched successfully",
            data=data,
            total_count=len(data),
            last_updated=last_updated
        )
    except Exception as e:
        logger.error(f"Unexpected error in get_runs: {str(e)}")
        raise HTTPException(
            status_code=500,
            detail={
                "success": False,
                "message": "Internal server error",
                "error_code": "INTERNAL_ERROR",
                "details": str(e)
            }
        )


@router.get(
    "/{run_id}",
    response_model=TrainingRunResponse,
    summary="Get one training run"
)
async def get_run(run_id: str, db: Session = Depends(get_db)) -> Any:
    run = results_service.get_run(db, run_id)
    if not run:
        raise HTTPException(
            status_code=404,
            detail={
                "success": False,
                "message": f"Run not found: {run_id}",
                "error_code": "NOT_FOUND"
            }
        )
    return run


@router.get(
    "/{run_id}/evaluations",
    response_model=EvaluationListResponse,
    summary="Evaluation cells of one run"
)
async def get_run_evaluations(run_id: str, db: Session = Depends(get_db)) -> Any:
    records = results_service.get_run_evaluations(db, run_id)
    data = [record.to_dict() for record in records]
    return EvaluationListResponse(
        success=True,
        message=f"{len(data)} evaluation(s) for {run_id}",
        data=data,
        total_count=len(data),
    )
