# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/logger.py
# ----------------------------------------------------------------------------------
# Purpose:
# Application logger. Records go to a size-rotated log file whose backups are
# gzip-compressed, and every record carries the registry run it belongs to
# (`train#3`), or `-` outside a registered run.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import gzip
import logging
import logging.handlers
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Generator, Optional

from uwb_har.utils.config import LoggingConfig

DEFAULT_LOG_PATH = Path("./logs") / "uwb_har.log"
LOG_FORMAT = "%(asctime)s - %(levelname)s - [%(run)s] [%(filename)s:%(lineno)d] - %(message)s"


def _gzip_name(default_name: str) -> str:
    return f"{default_name}.gz"


def _gzip_rotate(source: str, destination: str) -> None:
    with open(source, "rb") as file_input, gzip.open(destination, "wb") as compressed_output:
        shutil.copyfileobj(file_input, compressed_output)
    Path(source).unlink()


class CompressedRotatingFileHandler(logging.handlers.RotatingFileHandler):
    """Rotating file handler whose backups are `<log>.1.gz`, `<log>.2.gz`, ..."""

    def __init__(self, filename: str | Path, maxBytes: int = 0, backupCount: int = 0, **kwargs) -> None:
        super().__init__(str(filename), maxBytes=maxBytes, backupCount=backupCount, encoding="utf-8", **kwargs)
        self.namer = _gzip_name
        self.rotator = _gzip_rotate


class RunContextFilter(logging.Filter):
    """Stamps `record.run` with the active registry run."""

    def __init__(self) -> None:
        super().__init__()
        self.run = "-"

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.run
        return True


class AppLogger:
    """Singleton owner of the `uwb_har` logger."""

    _instance: Optional["AppLogger"] = None
    _logger: Optional[logging.Logger] = None
    _context: Optional[RunContextFilter] = None

    def __new__(cls) -> "AppLogger":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialize()
        return cls._instance

    def _initialize(self) -> None:
        if self._logger is not None:
            return

        level, log_path = "INFO", DEFAULT_LOG_PATH
        try:
            logging_config = LoggingConfig()
            if logging_config.log_file:
                log_path = Path(logging_config.log_file)
            if logging_config.log_level in logging.getLevelNamesMapping():
                level = logging_config.log_level
        except Exception:
            pass
        log_path.parent.mkdir(parents=True, exist_ok=True)

        self._context = RunContextFilter()
        # 10MB per file, keep 10 backups
        handler = CompressedRotatingFileHandler(log_path, maxBytes=10 * 1024 * 1024, backupCount=10)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
        handler.addFilter(self._context)
        handler.setLevel(level)

        self._logger = logging.getLogger("uwb_har")
        self._logger.setLevel(level)
        self._logger.addHandler(handler)
        # Stage output and the error line own the terminal
        self._logger.propagate = False

        self._logger.info(f"Logging initialized with level {level}, file {log_path}")

    def get_logger(self) -> logging.Logger:
        return self._logger

    @contextmanager
    def run_context(self, command: str, run_id: int | None) -> Generator[None, None, None]:
        """Tag records emitted inside the block with `<command>#<run_id>`."""
        previous = self._context.run
        self._context.run = f"{command}#{run_id}" if run_id is not None else command
        try:
            yield
        finally:
            self._context.run = previous

    @classmethod
    def reset(cls) -> None:
        """Drop handlers and the singleton (tests)."""
        if cls._instance and cls._instance._logger:
            for handler in cls._instance._logger.handlers[:]:
                cls._instance._logger.removeHandler(handler)
                handler.close()
            cls._instance._logger = None
        cls._instance = None


def get_logger() -> logging.Logger:
    """Get the application logger."""
    return AppLogger().get_logger()


def run_context(command: str, run_id: int | None = None):
    return AppLogger().run_context(command, run_id)
