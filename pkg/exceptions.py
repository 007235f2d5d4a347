import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, TextIO, Union

from pydantic import ValidationError

logger = logging.getLogger(__name__)

class LabException(Exception):
    def __init__(self, message: str, code: str = "LAB_ERROR", details: Dict[str, Any] = None):
        self.message = message
        self.code = code
        self.details = details or {}
        super().__init__(self.message)

class UsageError(LabException):
    def __init__(self, message: str):
        super().__init__(message, "USAGE_ERROR")

class DomainError(LabException):
    def __init__(self, message: str, field: str = None, value: Any = None):
        details = {"field": field, "value": value} if field else {}
        super().__init__(message, "DOMAIN_ERROR", details)

class DegenerateGameError(LabException):
    def __init__(self, message: str = "degenerate game", b: float = None):
        super().__init__(message, "DEGENERATE_GAME", {"b": b})

class PreconditionError(LabException):
    def __init__(self, message: str = "precondition violated", operation: str = None):
        super().__init__(message, "PRECONDITION_VIOLATED", {"operation": operation})

class CertificateError(LabException):
    def __init__(self, message: str = "no certificate found", start: Union[float, tuple] = None):
        details = {"start": start} if start is not None else {}
        super().__init__(message, "CERTIFICATE_ERROR", details)

class NotFoundError(LabException):
    def __init__(self, message: str, search_cap: float = None):
        super().__init__(message, "NOT_FOUND", {"search_cap": search_cap})

class UndecidedError(LabException):
    def __init__(self, message: str = "undecided", steps: int = None):
        super().__init__(message, "UNDECIDED", {"steps": steps})

class SweepError(LabException):
    def __init__(self, message: str, cell: int = None):
        super().__init__(message, "SWEEP_ERROR", {"cell": cell})

class DatasetIOError(LabException):
    def __init__(self, message: str, path: str = None):
        super().__init__(message, "IO_ERROR", {"path": path})

EXIT_CODE_MAP = {
    "USAGE_ERROR": 2,
    "DOMAIN_ERROR": 3,
    "DEGENERATE_GAME": 3,
    "PRECONDITION_VIOLATED": 3,
    "NOT_FOUND": 4,
    "UNDECIDED": 4,
    "CERTIFICATE_ERROR": 1,
    "SWEEP_ERROR": 1,
    "IO_ERROR": 1
}

def create_error_response(
    message: str,
    code: str = "ERROR",
    details: Dict[str, Any] = None,
    errors: List[Any] = None
) -> Dict[str, Any]:
    return {
        "status": "error",
        "message": message,
        "code": code,
        "data": None,
        "errors": errors or [],
        "details": details or {},
        "timestamp": datetime.now(timezone.utc).isoformat()
    }

def create_validation_error_response(errors: List[Dict[str, Any]]) -> Dict[str, Any]:
    formatted_errors = []
    for error in errors:
        formatted_errors.append({
            "field": ".".join(str(loc) for loc in error.get("loc", [])),
            "message": error.get("msg", "Validation error"),
            "type": error.get("type", "validation_error"),
            "input": error.get("input")
        })

    response = create_error_response("Validation failed", "DOMAIN_ERROR", errors=formatted_errors)
    return response

def _write(document: Dict[str, Any], stream: Optional[TextIO]) -> None:
    stream = stream or sys.stderr
    stream.write(json.dumps(document, default=str) + "\n")

def lab_exception_handler(exc: LabException, stream: TextIO = None) -> int:
    exit_code = EXIT_CODE_MAP.get(exc.code, 1)
    if exit_code == 4:
        logger.info(f"{exc.code}: {exc.message}")
    else:
        logger.error(f"{exc.code}: {exc.message}")
    _write(create_error_response(exc.message, exc.code, exc.details), stream)
    return exit_code

def validation_exception_handler(exc: ValidationError, stream: TextIO = None) -> int:
    logger.warning(f"Validation error: {exc.errors()}")
    _write(create_validation_error_response(exc.errors()), stream)
    return EXIT_CODE_MAP["DOMAIN_ERROR"]

def general_exception_handler(exc: Exception, stream: TextIO = None) -> int:
    logger.error(f"Unexpected error: {str(exc)}", exc_info=True)
    _write(create_error_response("An unexpected error occurred", "INTERNAL_ERROR"), stream)
    return 1
