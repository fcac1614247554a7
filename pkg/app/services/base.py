"""
Base service with common parsing and formatting helpers
"""
import hashlib
import json
import logging
import math
from typing import Any, Optional, Union

from app.core.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

INFINITY_TOKEN = "inf"
ShotValue = Optional[int]


def parse_shots(value: Union[str, int, float, None]) -> ShotValue:
    """
    Parse a shot budget.

    Args:
        value: positive integer, or "inf" / float('inf') for infinitely many shots

    Returns:
        Integer shot count, or None for infinite shots

    Raises:
        ConfigurationError: non-positive or unparsable budget
    """
    if value is None:
        return None
    if isinstance(value, str):
        text = value.strip().lower()
        if text in (INFINITY_TOKEN, "infinity", "∞"):
            return None
        try:
            value = int(text)
        except ValueError:
            raise ConfigurationError(f"shots: cannot parse '{value}', expected a positive integer or 'inf'")
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return None
        if not value.is_integer():
            raise ConfigurationError(f"shots: {value} is not an integer")
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigurationError(f"shots: entries must be >= 1 or 'inf', got {value!r}")
    return value


def format_shots(shots: ShotValue) -> str:
    return INFINITY_TOKEN if shots is None else str(shots)


def format_float(value: Optional[float]) -> str:
    """repr-style float text; infinities spelled 'inf'."""
    if value is None:
        return ""
    if math.isinf(value):
        return INFINITY_TOKEN if value > 0 else f"-{INFINITY_TOKEN}"
    return repr(float(value))


def run_digest(payload: Any, length: int = 12) -> str:
    """Short stable hash of a JSON-serializable payload."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:length]
