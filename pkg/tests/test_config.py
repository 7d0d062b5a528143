"""Tests for settings and structured logging."""

import json
import logging
from fractions import Fraction

import pytest
from pydantic import ValidationError

from core.config import Settings
from core.logging_config import JSONFormatter, TextFormatter


def _record(**extra) -> logging.LogRecord:
    record = logging.LogRecord("densitycert", logging.INFO, __file__, 10, "Suite finished", None, None)
    record.__dict__.update(extra)
    return record


class TestSettings:
    """Test environment-driven settings."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("VERIFY_MAX_DEPTH", raising=False)
        settings = Settings(_env_file=None)
        assert settings.VERIFY_MAX_DEPTH == 4
        assert settings.DEFAULT_EPSILON == "1/1048576"

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("VERIFY_MAX_INDEX", "6")
        assert Settings(_env_file=None).VERIFY_MAX_INDEX == 6

    def test_rejects_non_positive_cap(self, monkeypatch):
        monkeypatch.setenv("SEARCH_INDEX_CAP", "0")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_rejects_unknown_log_format(self, monkeypatch):
        monkeypatch.setenv("LOG_FORMAT", "xml")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)


class TestFormatters:
    def test_json_renders_fractions_exactly(self):
        data = json.loads(JSONFormatter().format(_record(epsilon=Fraction(1, 1024), checks=3)))
        assert data["message"] == "Suite finished"
        assert data["epsilon"] == "1/1024"
        assert data["checks"] == 3

    def test_text_appends_extras(self):
        line = TextFormatter().format(_record(suite="calc"))
        assert line.endswith("densitycert: Suite finished suite=calc")
