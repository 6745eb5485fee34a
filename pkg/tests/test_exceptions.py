"""Tests for leolink exceptions and their exit codes."""

import json

import pytest

from leolink.exceptions import (
    ConfigurationError,
    DomainError,
    EphemerisError,
    LeoLinkError,
    NumericalError,
    OutputError,
    ScenarioAbortedError,
)


class TestLeoLinkError:
    """Test the base exception class."""

    def test_base_exception_creation(self):
        """Test creating a base LeoLinkError."""
        exc = LeoLinkError("Test error")
        assert exc.message == "Test error"
        assert str(exc) == "Test error"
        assert exc.exit_code == 1
        assert exc.error_code == "LeoLinkError"
        assert exc.details == {}

    def test_base_exception_with_all_params(self):
        """Test creating LeoLinkError with all parameters."""
        details = {"key": "value", "count": 42}
        exc = LeoLinkError(
            message="Custom error",
            exit_code=5,
            error_code="CUSTOM_ERROR",
            details=details,
        )
        assert exc.exit_code == 5
        assert exc.error_code == "CUSTOM_ERROR"
        assert exc.details == details

    def test_exception_to_dict(self):
        """Test converting an exception to a JSON-ready dictionary."""
        exc = LeoLinkError("Bad input", error_code="BAD", details={"field": "dt"})
        data = exc.to_dict()
        assert data == {
            "error": "Bad input",
            "error_code": "BAD",
            "exit_code": 1,
            "details": {"field": "dt"},
        }
        assert json.loads(json.dumps(data)) == data

    def test_exception_to_dict_no_details(self):
        """Test the details key is omitted when empty."""
        assert "details" not in LeoLinkError("Plain").to_dict()

    @pytest.mark.parametrize(
        "cls",
        [ConfigurationError, DomainError, EphemerisError, NumericalError, OutputError],
    )
    def test_hierarchy(self, cls):
        """Test every library error derives from LeoLinkError."""
        assert issubclass(cls, LeoLinkError)
        assert issubclass(ScenarioAbortedError, NumericalError)


class TestExitCodes:
    """Test the CLI exit code carried by each error."""

    @pytest.mark.parametrize(
        ("exc", "code"),
        [
            (ConfigurationError("x"), 2),
            (DomainError("x"), 2),
            (EphemerisError("x"), 2),
            (NumericalError("x"), 3),
            (ScenarioAbortedError(4, 0.04, NumericalError("x")), 3),
            (OutputError("x"), 1),
        ],
    )
    def test_exit_code(self, exc, code):
        """Test the exit code of each error class."""
        assert exc.exit_code == code
        assert exc.to_dict()["exit_code"] == code


class TestDetails:
    """Test the structured details of each error."""

    def test_domain_error(self):
        """Test DomainError records the operation and value."""
        exc = DomainError("Bad angle", operation="slant_range", value=-0.1)
        assert exc.error_code == "DOMAIN_ERROR"
        assert exc.details == {"operation": "slant_range", "value": "-0.1"}

    def test_configuration_error(self):
        """Test ConfigurationError records key, value and position."""
        exc = ConfigurationError(
            "Invalid time.dt_s", config_key="time.dt_s", config_value=0, line=3, column=7
        )
        assert exc.error_code == "CONFIGURATION_ERROR"
        assert exc.details == {
            "config_key": "time.dt_s",
            "config_value": "0",
            "line": 3,
            "column": 7,
        }

    def test_ephemeris_error(self):
        """Test EphemerisError records the file and row."""
        exc = EphemerisError("Malformed row 4", path="eph.csv", row=4)
        assert exc.error_code == "EPHEMERIS_ERROR"
        assert exc.details == {"path": "eph.csv", "row": 4}

    def test_numerical_error(self):
        """Test NumericalError records the condition number."""
        exc = NumericalError("Ill-conditioned", condition_number=1e13)
        assert exc.error_code == "NUMERICAL_ERROR"
        assert exc.details["condition_number"] == 1e13

    def test_scenario_aborted(self):
        """Test ScenarioAbortedError wraps the numerical failure."""
        original = NumericalError("Innovation covariance is ill-conditioned", 1e14)
        exc = ScenarioAbortedError(120, 1.2, original)
        assert exc.error_code == "SCENARIO_ABORTED"
        assert exc.epoch == 120
        assert "epoch 120" in exc.message
        assert "t=1.200 s" in exc.message
        assert "ill-conditioned" in exc.message
        assert exc.details["condition_number"] == 1e14
        assert exc.details["original_error_type"] == "NumericalError"

    def test_output_error(self):
        """Test OutputError records the path and the OS error."""
        exc = OutputError("Cannot write", path="out", original_error=PermissionError("denied"))
        assert exc.error_code == "OUTPUT_ERROR"
        assert exc.details["path"] == "out"
        assert exc.details["original_error"] == "denied"
        assert exc.details["original_error_type"] == "PermissionError"
