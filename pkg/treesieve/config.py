"""Environment configuration and logging setup."""

import logging
import os
from os import getenv

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator
from rich.console import Console
from rich.logging import RichHandler

# Load environment variables
load_dotenv()


class Settings(BaseModel):
    """Runtime defaults, overridable from the environment or a .env file."""
    workers: int = Field(default=1, ge=1, description="Worker processes for independent trials")
    seed: int = Field(default=0, ge=0, description="Seed used when none is given")
    log_level: str = Field(default="WARNING", description="Logging level name")
    color_subset_cap: int = Field(
        default=10_000, ge=1, description="Color subsets enumerated before switching to sampling"
    )

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {value!r}")
        return value


def get_settings() -> Settings:
    """Read settings from the current environment.

    Returns:
        Settings instance; read on every call so tests can patch the environment.
    """
    return Settings(
        workers=int(getenv("TREESIEVE_WORKERS") or os.cpu_count() or 1),
        seed=int(getenv("TREESIEVE_SEED", "0")),
        log_level=getenv("TREESIEVE_LOG_LEVEL", "WARNING"),
        color_subset_cap=int(getenv("TREESIEVE_COLOR_SUBSET_CAP", "10000")),
    )


def configure_logging(level: str) -> None:
    """Route the package logger through a Rich handler on stderr."""
    logger = logging.getLogger("treesieve")
    logger.handlers.clear()
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
