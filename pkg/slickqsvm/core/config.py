from functools import lru_cache
from typing import List

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    PROJECT_NAME: str = "slickqsvm"
    VERSION: str = "1.0.0"

    # Reproducibility
    SEED: int = 0
    THREADS: int = 1

    # Scenes are resampled to this (height, width) on ingestion
    WORKING_SIZE: List[int] = [256, 256]

    # Logging
    LOG_LEVEL: str = "INFO"

    # Run registry
    REGISTRY_ENABLED: bool = True
    REGISTRY_URL: str = "sqlite:///./slickqsvm_runs.db"

    # Element budget of one (pixels x support vectors x features) inference block
    INFERENCE_CHUNK_ELEMENTS: int = 4_000_000

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="SLICKQSVM_",
        case_sensitive=True,
        extra="ignore",
    )

    @field_validator("THREADS")
    @classmethod
    def _threads_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("THREADS must be >= 1")
        return value

    @field_validator("WORKING_SIZE")
    @classmethod
    def _working_size_pair(cls, value: List[int]) -> List[int]:
        if len(value) != 2 or min(value) < 1:
            raise ValueError("WORKING_SIZE must be two positive integers")
        return value


@lru_cache
def get_settings() -> Settings:
    """Process-wide settings, read once from the environment and .env"""
    return Settings()


settings = get_settings()
