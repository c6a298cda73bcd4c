# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/config.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module defines the environment-driven configuration classes for UWB-HAR
# (log file, run registry database, worker threads).
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value else default


class BaseConfig:
    """Simple application configuration class - only essential variables."""

    # Logging configuration
    LOG_FILE = os.getenv("UWB_HAR_LOG_FILE")
    LOG_LEVEL = os.getenv("UWB_HAR_LOG_LEVEL", "INFO").upper()

    # Run registry configuration
    DATABASE_URI = os.getenv("UWB_HAR_DATABASE_URI")
    DB_ECHO = os.getenv("UWB_HAR_DB_ECHO", "false").lower() == "true"

    # Runtime configuration
    THREADS = _env_int("UWB_HAR_THREADS", 1)


@dataclass(frozen=True)
class DatabaseConfig:
    """Run registry database configuration."""

    _database_uri: str | None = field(init=False, compare=False, repr=False, default=BaseConfig.DATABASE_URI)
    _echo: bool = field(init=False, compare=False, repr=False, default=BaseConfig.DB_ECHO)

    @property
    def database_uri(self) -> str | None:
        """Get the database URI (None when the registry default should be used)."""
        return self._database_uri

    @property
    def echo(self) -> bool:
        """Get the database echo setting."""
        return self._echo


@dataclass(frozen=True)
class LoggingConfig:
    """Logging configuration."""

    _log_file: str | None = field(init=False, compare=False, repr=False, default=BaseConfig.LOG_FILE)
    _log_level: str = field(init=False, compare=False, repr=False, default=BaseConfig.LOG_LEVEL)

    @property
    def log_file(self) -> str | None:
        """Get the log file path."""
        return self._log_file

    @property
    def log_level(self) -> str:
        """Get the log level name."""
        return self._log_level


@dataclass(frozen=True)
class RuntimeConfig:
    """Runtime configuration."""

    _threads: int = field(init=False, compare=False, repr=False, default=BaseConfig.THREADS)

    @property
    def threads(self) -> int:
        """Get the default number of worker threads."""
        return max(1, self._threads)
