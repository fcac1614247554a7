"""
Exception hierarchy shared by the simulator, services, CLI and API
"""
from typing import Any, Dict, Optional


class LabError(Exception):
    """Base error carrying an error code and a CLI exit code"""
    error_code: str = "LAB_ERROR"
    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        return {
            "success": False,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
        }


class ConfigurationError(LabError):
    """Invalid configuration or structural limit"""
    error_code = "CONFIG_ERROR"
    exit_code = 2


class UnsupportedConfigurationError(ConfigurationError):
    """Valid values combined in a way the lab does not support"""
    error_code = "UNSUPPORTED_CONFIG"


class ArgumentError(LabError, ValueError):
    """Argument shape or value mismatch"""
    error_code = "ARGUMENT_ERROR"
    exit_code = 2


class QubitIndexError(LabError, IndexError):
    """Qubit index out of range"""
    error_code = "INDEX_ERROR"
    exit_code = 2


class DataFormatError(LabError):
    """Malformed data, checkpoint or config file"""
    error_code = "FORMAT_ERROR"
    exit_code = 3


class NumericDomainError(LabError, ValueError):
    """Input outside the domain of a bound calculator"""
    error_code = "DOMAIN_ERROR"
    exit_code = 4
