# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/database.py
# ----------------------------------------------------------------------------------
# Purpose:
# Run registry connection and session management. The registry is a SQLite file
# shared by every run (./registry/registry.sqlite unless registry.path moves it),
# kept apart from stage outputs. UWB_HAR_DATABASE_URI or registry.uri point it at
# any other database; the schema is created on first use.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from contextlib import contextmanager
from dataclasses import dataclass, field
from logging import Logger
from pathlib import Path
from typing import Generator

from sqlalchemy import Engine, create_engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker

from uwb_har.utils.config import DatabaseConfig
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.logger import get_logger

__all__ = ["DEFAULT_REGISTRY_PATH", "DatabaseManager", "DBException", "sqlite_uri"]

SQLITE_PREFIX = "sqlite:///"
DEFAULT_REGISTRY_PATH = Path("./registry") / "registry.sqlite"
# Seconds a writer waits on a registry locked by a concurrent stage
SQLITE_LOCK_TIMEOUT_S = 30


def sqlite_uri(path: str | Path) -> str:
    return f"{SQLITE_PREFIX}{Path(path)}"


@dataclass
class DatabaseManager:
    """Lazily opened run registry; `get_session` commits on success and rolls back on error."""

    database_uri: str | None = field(default=None)

    _config: DatabaseConfig = field(init=False, compare=False, repr=False, default=DatabaseConfig())
    _logger: Logger = field(init=False, compare=False, repr=False, default=get_logger())
    _engine: Engine | None = field(init=False, compare=False, repr=False, default=None)
    _session_factory: sessionmaker | None = field(init=False, compare=False, repr=False, default=None)

    @classmethod
    def for_registry(cls, uri: str | None, path: str | Path | None = None) -> "DatabaseManager":
        """Explicit URI, else the SQLite file at `path` (default `./registry/registry.sqlite`)."""
        return cls(uri or sqlite_uri(path or DEFAULT_REGISTRY_PATH))

    @property
    def uri(self) -> str:
        """Environment URI wins over the configured one."""
        uri = self._config.database_uri or self.database_uri
        if not uri:
            raise DBException("No registry database URI configured")
        return uri

    def _open(self) -> sessionmaker:
        if self._session_factory is None:
            self._engine = self._create_engine(self.uri)
            self._session_factory = sessionmaker(bind=self._engine)
        return self._session_factory

    def _create_engine(self, uri: str) -> Engine:
        from uwb_har.models import Base

        self._logger.info(f"Opening run registry {uri}")
        connect_args = {}
        try:
            if uri.startswith(SQLITE_PREFIX):
                connect_args["timeout"] = SQLITE_LOCK_TIMEOUT_S
                if uri != f"{SQLITE_PREFIX}:memory:":
                    Path(uri.removeprefix(SQLITE_PREFIX)).parent.mkdir(parents=True, exist_ok=True)
            engine = create_engine(uri, echo=self._config.echo, connect_args=connect_args)
            Base.metadata.create_all(engine)
        except (SQLAlchemyError, OSError) as e:
            raise DBException(f"Cannot open registry {uri}: {e}", original_error=e)
        return engine

    @contextmanager
    def get_session(self) -> Generator[Session, None, None]:
        session = self._open()()
        try:
            yield session
            session.commit()
        except Exception as e:
            self._logger.error(f"Registry session failed, rolling back: {e}")
            session.rollback()
            raise
        finally:
            session.close()

    def close(self) -> None:
        if self._engine is not None:
            self._engine.dispose()
            self._logger.info("Run registry closed")
        self._engine = None
        self._session_factory = None


class DBException(UwbHarError):
    """Run registry failure."""

    def __init__(self, message: str, original_error: Exception | None = None) -> None:
        super().__init__(message, operation="registry", kind="registry", original_error=original_error)
