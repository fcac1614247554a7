"""
API v1 router
"""
from fastapi import APIRouter

from app.api.v1.endpoints import bounds, noise, runs

api_router = APIRouter()

# Include endpoint routers
api_router.include_router(bounds.router)
api_router.include_router(noise.router)
api_router.include_router(runs.router)
