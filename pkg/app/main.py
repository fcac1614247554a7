"""
FastAPI application exposing the lab's bounds, noise presets and run registry
"""
import logging
from contextlib import asynccontextmanager
from datetime import datetime, timezone

from fastapi import Depends, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from sqlalchemy import text
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from app.api.v1.api import api_router
from app.core.config import settings
from app.core.exceptions import LabError, NumericDomainError
from app.db.database import get_db, init_db
from app.quantum.noise import presets
from app.schemas.base import ErrorResponse

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Create the registry tables before serving; the CLI fills them."""
    logger.info(f"Starting {settings.APP_NAME} {settings.APP_VERSION}")
    try:
        init_db()
    except SQLAlchemyError as e:
        logger.error(f"Registry at {settings.DATABASE_URL} is unusable: {e}")
        raise
    logger.info(f"Run registry ready at {settings.DATABASE_URL}")
    yield
    logger.info(f"Stopping {settings.APP_NAME}")


app = FastAPI(
    title=settings.APP_NAME,
    description="Shot-complexity calculators, hardware noise presets and the training run registry",
    version=settings.APP_VERSION,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_methods=["GET"],
    allow_headers=["*"],
)
app.include_router(api_router, prefix=settings.API_V1_PREFIX)


@app.get("/", tags=["Health"])
async def root():
    """Service identity and the simulator limits it enforces."""
    return {
        "application": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "max_statevector_qubits": settings.MAX_STATEVECTOR_QUBITS,
        "noise_presets": [model.name for model in presets()],
        "timestamp": utc_now(),
    }


@app.get("/health", tags=["Health"])
async def health_check(db: Session = Depends(get_db)):
    try:
        db.execute(text("SELECT 1"))
        registry = "connected"
    except SQLAlchemyError as e:
        logger.warning(f"Registry check failed: {e}")
        registry = "unavailable"
    return {
        "status": "healthy" if registry == "connected" else "degraded",
        "registry": registry,
        "timestamp": utc_now(),
    }


@app.exception_handler(LabError)
async def lab_exception_handler(request: Request, exc: LabError):
    status_code = 422 if isinstance(exc, NumericDomainError) else 400
    logger.warning(f"{exc.error_code} on {request.url.path}: {exc.message}")
    return JSONResponse(status_code=status_code, content=ErrorResponse(**exc.to_dict()).model_dump())


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=500,
        content=ErrorResponse(message="Internal server error", error_code="INTERNAL_ERROR").model_dump()
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.DEBUG,
        log_level=settings.LOG_LEVEL.lower()
    )
