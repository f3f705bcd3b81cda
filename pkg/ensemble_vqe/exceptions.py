from typing import Optional, Dict, Any

EXIT_OK = 0
EXIT_UNHANDLED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

class AppError(Exception):
    """Base exception for workbench errors"""
    def __init__(
        self,
        detail: str,
        error_code: Optional[str] = None,
        exit_code: int = EXIT_NUMERICAL,
        context: Optional[Dict[str, Any]] = None,
    ):
        self.detail = detail
        self.error_code = error_code or "app_error"
        self.exit_code = exit_code
        self.context = context or {}

        super().__init__(detail)

class ValidationError(AppError):
    """Raised when input validation fails"""
    def __init__(self, detail: str = "Validation error", errors: Optional[Dict] = None):
        super().__init__(
            detail=detail,
            error_code="validation_error",
            exit_code=EXIT_CONFIG,
        )
        self.errors = errors or {}

class DimensionError(AppError):
    """Raised when qubit counts or parameter lengths do not match"""
    def __init__(self, detail: str = "Dimension mismatch"):
        super().__init__(
            detail=detail,
            error_code="dimension_error",
            exit_code=EXIT_NUMERICAL,
        )

class SizeLimitError(AppError):
    """Raised when a request exceeds the desk-scale limits"""
    def __init__(self, what: str, size: int, limit: int):
        super().__init__(
            detail=f"{what} of {size} exceeds the limit of {limit}",
            error_code="size_limit_exceeded",
            exit_code=EXIT_CONFIG,
            context={"size": size, "limit": limit},
        )

class ParseError(AppError):
    """Raised when an input file cannot be parsed"""
    def __init__(self, source: str, line_number: int, detail: str):
        super().__init__(
            detail=f"{source}:{line_number}: {detail}",
            error_code="parse_error",
            exit_code=EXIT_CONFIG,
            context={"source": source, "line_number": line_number},
        )
        self.line_number = line_number

class ConfigError(AppError):
    """Raised when a scenario configuration is invalid or unreadable"""
    def __init__(self, detail: str = "Invalid scenario configuration"):
        super().__init__(
            detail=detail,
            error_code="config_error",
            exit_code=EXIT_CONFIG,
        )

class NumericalError(AppError):
    """Raised when a numerical routine fails"""
    def __init__(self, detail: str = "Numerical failure"):
        super().__init__(
            detail=detail,
            error_code="numerical_error",
            exit_code=EXIT_NUMERICAL,
        )

class UndefinedTestError(AppError):
    """Raised when a statistical test is undefined for the given data"""
    def __init__(self, test: str, detail: str):
        super().__init__(
            detail=f"{test} is undefined: {detail}",
            error_code="undefined_test",
            exit_code=EXIT_NUMERICAL,
        )
