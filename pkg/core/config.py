"""Application configuration using environment variables."""

from functools import lru_cache

from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "text"  # json or text

    # Construction
    DEFAULT_EPSILON: str = "1/1048576"  # 2^-20

    # Verification suites
    VERIFY_MAX_DEPTH: int = 4
    VERIFY_MAX_INDEX: int = 8
    VERIFY_MIN_EPSILON_EXP: int = 60  # global builds refuse thresholds below 2^-60
    PARALLEL_WORKERS: int = 4

    # Witness searches
    SEARCH_INDEX_CAP: int = 4096
    WITNESS_LEVEL_REFINEMENT: int = 1024

    # Output
    DECIMAL_DIGITS: int = 12

    @field_validator(
        "VERIFY_MAX_DEPTH",
        "VERIFY_MAX_INDEX",
        "VERIFY_MIN_EPSILON_EXP",
        "PARALLEL_WORKERS",
        "SEARCH_INDEX_CAP",
        "WITNESS_LEVEL_REFINEMENT",
        "DECIMAL_DIGITS",
    )
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @field_validator("LOG_FORMAT")
    @classmethod
    def known_format(cls, v: str) -> str:
        if v.lower() not in ("json", "text"):
            raise ValueError("LOG_FORMAT must be 'json' or 'text'")
        return v.lower()

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
