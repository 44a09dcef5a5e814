"""Configuration management for the churn pipeline."""

from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings loaded from CHURN_* environment variables."""

    # Logging
    log_level: str = "WARNING"
    log_format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

    # Pipeline defaults
    output_dir: str = "runs"
    null_tokens: List[str] = ["", "NULL", "null"]
    default_threshold: float = 0.5
    default_seed: int = 7

    model_config = SettingsConfigDict(
        env_prefix="CHURN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

# Global settings instance
settings = Settings()
