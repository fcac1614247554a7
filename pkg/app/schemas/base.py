"""
Response envelopes shared by the API endpoints
"""
from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class BaseResponse(BaseModel):
    success: bool = True
    message: str


class ListResponse(BaseResponse):
    """List payload with a count and the newest update time, if any"""
    data: List[Dict[str, Any]]
    total_count: int
    last_updated: Optional[datetime] = None


class ErrorResponse(BaseModel):
    """Body of every error response; mirrors LabError.to_dict()"""
    success: bool = False
    message: str
    error_code: Optional[str] = None
    details: Optional[Dict[str, Any]] = None
