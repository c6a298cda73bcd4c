# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/processors/run_processor.py
# ----------------------------------------------------------------------------------
# Purpose:
# Run registry bookkeeping for one CLI invocation. A registered stage opens a
# RUNNING run, stores its metric rows while it works and closes the run as
# FINISHED or ERROR. A registry that cannot be reached is reported and skipped:
# it never fails the stage it would have recorded.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from contextlib import contextmanager
from pathlib import Path
from typing import Generator, Iterable, Optional

from uwb_har import crud
from uwb_har.models import RunStatusEnum
from uwb_har.run_config import ConfigError, RunConfig
from uwb_har.utils.database import DatabaseManager, DBException
from uwb_har.utils.logger import get_logger, run_context

__all__ = ["MetricRow", "RunProcessor"]

MetricRow = tuple[str, str, str, float]


class RunProcessor:
    """Processor for recording runs and their metrics in the registry."""

    def __init__(self, cfg: RunConfig, db_manager: Optional[DatabaseManager] = None):
        self._cfg = cfg
        self._db_manager = db_manager
        self._logger = get_logger()
        self._run_id: Optional[int] = None

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "RunProcessor":
        """Registry as configured; a disabled registry records nothing."""
        if not cfg.registry.enabled:
            return cls(cfg)
        return cls(cfg, DatabaseManager.for_registry(cfg.registry.uri, cfg.registry.path))

    @property
    def enabled(self) -> bool:
        return self._db_manager is not None

    @property
    def run_id(self) -> Optional[int]:
        """Id of the run being recorded, None outside `registered` or without a registry."""
        return self._run_id

    @contextmanager
    def registered(self, command: str) -> Generator["RunProcessor", None, None]:
        """Record the block as one run of `command`."""
        if self._db_manager is None:
            yield self
            return
        try:
            self._run_id = crud.create_run(self._db_manager, command, self._cfg.seed, self._cfg.digest(), str(Path(self._cfg.out)))
        except DBException as e:
            self._logger.warning(f"Run registry unavailable: {e}")
            yield self
            return
        try:
            with run_context(command, self._run_id):
                yield self
        except BaseException:
            self._finish(RunStatusEnum.ERROR)
            raise
        self._finish(RunStatusEnum.FINISHED)

    def record(self, rows: Iterable[MetricRow]) -> None:
        """Store (config_name, metric, class_label, value) rows for the current run."""
        if self._db_manager is None or self._run_id is None:
            return
        try:
            crud.add_metrics(self._db_manager, self._run_id, rows)
        except DBException as e:
            self._logger.warning(f"Could not store metrics for run {self._run_id}: {e}")

    def _finish(self, status: RunStatusEnum) -> None:
        try:
            crud.finish_run(self._db_manager, self._run_id, status)
        except DBException as e:
            self._logger.warning(f"Could not close registry run {self._run_id}: {e}")
        finally:
            self._run_id = None

    def _require_registry(self, operation: str) -> DatabaseManager:
        if self._db_manager is None:
            raise ConfigError("the run registry is disabled (registry.enabled: false)", operation=operation)
        return self._db_manager

    def list_runs(self, command: Optional[str] = None, limit: Optional[int] = None) -> list[dict]:
        """Registered runs, newest first."""
        runs = crud.list_runs(self._require_registry("runs"), command)
        return runs[:limit] if limit else runs

    def get_run(self, run_id: int) -> Optional[dict]:
        return crud.get_run(self._require_registry("runs"), run_id)

    def close(self) -> None:
        if self._db_manager is not None:
            self._db_manager.close()
