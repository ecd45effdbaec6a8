"""
Application Configuration using Pydantic Settings
"""
from typing import ClassVar

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    APP_NAME: ClassVar[str] = "sweepctl"
    # Bumped whenever a CSV column or JSON field changes meaning
    SCHEMA_VERSION: ClassVar[str] = "1.0"

    # Output directory is the only value the environment may override
    OUTPUT_DIR: str = "runs"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="SWEEPCTL_",
        case_sensitive=True,
        extra="ignore"
    )


# Create global settings instance
settings = Settings()
