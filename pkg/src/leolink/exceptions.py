"""leolink exception classes.

Every error raised by the library derives from :class:`LeoLinkError`, which
carries a machine-readable error code, structured details and the process
exit code the command-line front end reports for it.
"""

from __future__ import annotations

from typing import Any


class LeoLinkError(Exception):
    """Base exception class for all leolink errors.

    Args:
        message: Human-readable error message
        exit_code: Process exit code used by the CLI (default: 1)
        error_code: Library-specific error code for categorization
        details: Additional error details as key-value pairs

    Attributes:
        message: The error message
        exit_code: CLI exit code for the error
        error_code: Library error code
        details: Additional error context
    """

    exit_code: int = 1

    def __init__(
        self,
        message: str,
        exit_code: int | None = None,
        error_code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Convert exception to a dictionary for JSON summaries and logs.

        Returns:
            Dictionary representation of the exception
        """
        result: dict[str, Any] = {
            "error": self.message,
            "error_code": self.error_code,
            "exit_code": self.exit_code,
        }

        if self.details:
            result["details"] = self.details

        return result


class DomainError(LeoLinkError):
    """Raised when a numeric operation receives input outside its domain.

    Examples are non-finite coordinates, zero-length position vectors,
    coincident satellite and UE positions, or a singular covariance handed
    to a density evaluation.

    Args:
        message: Description of the domain violation
        operation: Name of the operation that rejected the input (optional)
        value: The offending value (optional)
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        operation: str | None = None,
        value: Any | None = None,
    ) -> None:
        details: dict[str, Any] = {}

        if operation:
            details["operation"] = operation
        if value is not None:
            details["value"] = str(value)

        super().__init__(
            message=message,
            error_code="DOMAIN_ERROR",
            details=details,
        )


class ConfigurationError(LeoLinkError):
    """Raised for scenario configuration errors.

    Covers JSON syntax errors (with line and column), unknown keys and
    per-field invariant violations.

    Args:
        message: Description of the configuration error
        config_key: Dotted configuration key that caused the error (optional)
        config_value: The invalid configuration value (optional)
        line: Line number of a syntax error (optional)
        column: Column number of a syntax error (optional)
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        config_key: str | None = None,
        config_value: Any | None = None,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        details: dict[str, Any] = {}

        if config_key:
            details["config_key"] = config_key
        if config_value is not None:
            details["config_value"] = str(config_value)
        if line is not None:
            details["line"] = line
        if column is not None:
            details["column"] = column

        super().__init__(
            message=message,
            error_code="CONFIGURATION_ERROR",
            details=details,
        )


class EphemerisError(LeoLinkError):
    """Raised when an ephemeris CSV cannot be ingested.

    Args:
        message: Description of the problem
        path: File being read (optional)
        row: 1-based data row number of the offending record (optional)
    """

    exit_code = 2

    def __init__(
        self,
        message: str,
        path: str | None = None,
        row: int | None = None,
    ) -> None:
        details: dict[str, Any] = {}

        if path:
            details["path"] = path
        if row is not None:
            details["row"] = row

        super().__init__(
            message=message,
            error_code="EPHEMERIS_ERROR",
            details=details,
        )


class NumericalError(LeoLinkError):
    """Raised when a filter step is numerically unsafe and gets rejected.

    Args:
        message: Description of the numerical failure
        condition_number: Condition number of the offending matrix (optional)
    """

    exit_code = 3

    def __init__(
        self,
        message: str,
        condition_number: float | None = None,
    ) -> None:
        details: dict[str, Any] = {}

        if condition_number is not None:
            details["condition_number"] = condition_number

        super().__init__(
            message=message,
            error_code="NUMERICAL_ERROR",
            details=details,
        )


class ScenarioAbortedError(NumericalError):
    """Raised when a scenario stops because a filter step failed.

    Args:
        epoch: Index of the epoch at which the filter failed
        time: Simulation time of that epoch in seconds
        original_error: The numerical error that triggered the abort
    """

    def __init__(
        self,
        epoch: int,
        time: float,
        original_error: NumericalError,
    ) -> None:
        super().__init__(
            f"Scenario aborted at epoch {epoch} (t={time:.3f} s): "
            f"{original_error.message}",
        )
        self.error_code = "SCENARIO_ABORTED"
        self.epoch = epoch
        self.details.update(original_error.details)
        self.details["epoch"] = epoch
        self.details["time"] = time
        self.details["original_error_type"] = type(original_error).__name__


class OutputError(LeoLinkError):
    """Raised when results cannot be written.

    Args:
        message: Description of the IO failure
        path: Path that could not be written (optional)
        original_error: The underlying OS error (optional)
    """

    def __init__(
        self,
        message: str,
        path: str | None = None,
        original_error: Exception | None = None,
    ) -> None:
        details: dict[str, Any] = {}

        if path:
            details["path"] = path
        if original_error:
            details["original_error"] = str(original_error)
            details["original_error_type"] = type(original_error).__name__

        super().__init__(
            message=message,
            error_code="OUTPUT_ERROR",
            details=details,
        )
