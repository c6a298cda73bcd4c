# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/crud.py
# ----------------------------------------------------------------------------------
# Purpose:
# Direct CRUD operations for the run registry, used by the CLI to record runs and
# their metric values.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from datetime import datetime
from typing import Iterable, Optional

from sqlalchemy import select
from sqlalchemy.orm import selectinload

from uwb_har.models import MetricRecord, RunRecord, RunStatusEnum
from uwb_har.utils.database import DatabaseManager, DBException


def create_run(db_manager: DatabaseManager, command: str, seed: int, config_digest: str, out_dir: str) -> int:
    """Register a new run in RUNNING state and return its id."""
    with db_manager.get_session() as session:
        try:
            run = RunRecord(
                command=command,
                seed=seed,
                config_digest=config_digest,
                status=RunStatusEnum.RUNNING,
                started_at=datetime.now(),
                out_dir=out_dir,
            )
            session.add(run)
            session.flush()
            return run.id
        except Exception as e:
            raise DBException(f"Error creating run for command '{command}': {e}", original_error=e)


def finish_run(db_manager: DatabaseManager, run_id: int, status: RunStatusEnum = RunStatusEnum.FINISHED) -> bool:
    """Mark a run FINISHED or ERROR."""
    with db_manager.get_session() as session:
        try:
            run = session.execute(select(RunRecord).where(RunRecord.id == run_id)).scalar_one_or_none()

            if not run:
                return False

            run.status = status
            run.finished_at = datetime.now()
            return True
        except Exception as e:
            raise DBException(f"Error finishing run {run_id}: {e}", original_error=e)


def add_metrics(db_manager: DatabaseManager, run_id: int, values: Iterable[tuple[str, str, str, float]]) -> int:
    """Store (config_name, name, class_label, value) rows for a run; returns the row count."""
    with db_manager.get_session() as session:
        try:
            rows = [
                MetricRecord(run_id=run_id, config_name=config_name, name=name, class_label=class_label, value=float(value))
                for config_name, name, class_label, value in values
            ]
            session.add_all(rows)
            return len(rows)
        except Exception as e:
            raise DBException(f"Error storing metrics for run {run_id}: {e}", original_error=e)


def get_run(db_manager: DatabaseManager, run_id: int) -> Optional[dict]:
    """Get a run and its metrics as a dict."""
    with db_manager.get_session() as session:
        try:
            run = session.execute(select(RunRecord).options(selectinload(RunRecord.metrics)).where(RunRecord.id == run_id)).scalar_one_or_none()

            if not run:
                return None

            # Extract all data while session is active
            return {
                "id": run.id,
                "command": run.command,
                "seed": run.seed,
                "config_digest": run.config_digest,
                "status": RunStatusEnum(run.status),
                "started_at": run.started_at,
                "finished_at": run.finished_at,
                "out_dir": run.out_dir,
                "metrics": [(m.config_name, m.name, m.class_label, m.value) for m in sorted(run.metrics, key=lambda m: m.id)],
            }
        except Exception as e:
            raise DBException(f"Error getting run {run_id}: {e}", original_error=e)


def list_runs(db_manager: DatabaseManager, command: Optional[str] = None) -> list[dict]:
    """List runs (optionally for one command), newest first, without metrics."""
    with db_manager.get_session() as session:
        try:
            query = select(RunRecord).order_by(RunRecord.id.desc())
            if command:
                query = query.where(RunRecord.command == command)
            return [
                {"id": run.id, "command": run.command, "seed": run.seed, "status": RunStatusEnum(run.status), "out_dir": run.out_dir}
                for run in session.execute(query).scalars().all()
            ]
        except Exception as e:
            raise DBException(f"Error listing runs: {e}", original_error=e)
