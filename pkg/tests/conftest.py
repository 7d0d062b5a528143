"""Pytest configuration and fixtures."""

import json
import random
from pathlib import Path

import pytest

from construction.base import TruncatedSet
from construction.removals import truncate
from core.rationals import power_of_two


@pytest.fixture(scope="session")
def truncation_20() -> TruncatedSet:
    """Global truncation keeping removals of length >= 2^-20."""
    return truncate(power_of_two(-20))


@pytest.fixture(scope="session")
def truncation_30() -> TruncatedSet:
    return truncate(power_of_two(-30))


@pytest.fixture(scope="session")
def truncation_40() -> TruncatedSet:
    """Fine global truncation used by the K-density checks."""
    return truncate(power_of_two(-40))


@pytest.fixture
def rng() -> random.Random:
    """Seeded generator so sampled checks are reproducible."""
    return random.Random(20240115)


@pytest.fixture
def set_file(tmp_path: Path, truncation_20: TruncatedSet) -> Path:
    """The 2^-20 truncation saved as JSON."""
    path = tmp_path / "set.json"
    path.write_text(json.dumps(truncation_20.to_dict()), encoding="utf-8")
    return path
