# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: test_registry.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module provides tests for the run registry CRUD functions and the
# RunProcessor that records CLI runs, on a temporary SQLite database.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import sys
from pathlib import Path

import pytest

# Add the project root to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from uwb_har import crud
from uwb_har.models import RunStatusEnum
from uwb_har.processors.run_processor import RunProcessor
from uwb_har.run_config import ConfigError, RunConfig
from uwb_har.utils.database import DEFAULT_REGISTRY_PATH, DatabaseManager, DBException, sqlite_uri


class TestRunRegistry:
    """Test cases for registering runs and their metrics."""

    @pytest.fixture
    def manager(self, tmp_path):
        manager = DatabaseManager(f"sqlite:///{tmp_path / 'registry.sqlite'}")
        yield manager
        manager.close()

    def test_create_run_starts_running(self, manager):
        run_id = crud.create_run(manager, "train", seed=7, config_digest="abc", out_dir="/tmp/run")
        run = crud.get_run(manager, run_id)
        assert run["status"] == RunStatusEnum.RUNNING
        assert (run["command"], run["seed"], run["config_digest"]) == ("train", 7, "abc")
        assert run["started_at"] is not None and run["finished_at"] is None
        assert run["metrics"] == []

    def test_finish_run(self, manager):
        run_id = crud.create_run(manager, "eval", seed=0, config_digest="d", out_dir="out")
        assert crud.finish_run(manager, run_id, RunStatusEnum.ERROR)
        run = crud.get_run(manager, run_id)
        assert run["status"] == RunStatusEnum.ERROR
        assert run["finished_at"] >= run["started_at"]

    def test_metrics_keep_insertion_order(self, manager):
        run_id = crud.create_run(manager, "eval", seed=0, config_digest="d", out_dir="out")
        rows = [("fused", "macro_f1", "", 0.93), ("fused", "f1", "F", 0.88), ("time-only", "accuracy", "", 0.8)]
        assert crud.add_metrics(manager, run_id, rows) == 3
        assert crud.get_run(manager, run_id)["metrics"] == rows

    def test_list_runs_newest_first(self, manager):
        first = crud.create_run(manager, "train", seed=0, config_digest="d", out_dir="out")
        second = crud.create_run(manager, "eval", seed=0, config_digest="d", out_dir="out")
        third = crud.create_run(manager, "train", seed=1, config_digest="d", out_dir="out")
        assert [run["id"] for run in crud.list_runs(manager)] == [third, second, first]
        assert [run["id"] for run in crud.list_runs(manager, command="train")] == [third, first]

    def test_missing_run(self, manager):
        assert crud.get_run(manager, 404) is None
        assert crud.finish_run(manager, 404) is False

    def test_registry_persists_across_managers(self, tmp_path):
        uri = sqlite_uri(tmp_path / "nested" / "registry.sqlite")
        writer = DatabaseManager(uri)
        run_id = crud.create_run(writer, "bench", seed=3, config_digest="d", out_dir="out")
        writer.close()
        assert (tmp_path / "nested" / "registry.sqlite").exists()

        reader = DatabaseManager(uri)
        assert crud.get_run(reader, run_id)["command"] == "bench"
        reader.close()

    def test_explicit_uri_wins_over_registry_path(self, tmp_path):
        explicit = f"sqlite:///{tmp_path / 'shared.sqlite'}"
        assert DatabaseManager.for_registry(explicit, tmp_path / "registry.sqlite").uri == explicit
        assert DatabaseManager.for_registry(None, tmp_path / "registry.sqlite").uri == sqlite_uri(tmp_path / "registry.sqlite")

    def test_default_registry_lives_outside_stage_outputs(self):
        assert DatabaseManager.for_registry(None).database_uri == sqlite_uri(DEFAULT_REGISTRY_PATH)
        assert DEFAULT_REGISTRY_PATH.parent.name == "registry"

    def test_unreachable_database_raises_registry_error(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        manager = DatabaseManager(f"sqlite:///{blocker / 'registry.sqlite'}")
        with pytest.raises(DBException) as excinfo:
            crud.list_runs(manager)
        assert excinfo.value.kind == "registry"


class TestRunProcessor:
    """Test cases for recording a stage as one registry run."""

    @pytest.fixture
    def registry(self, tmp_path):
        cfg = RunConfig.from_dict({"out": str(tmp_path / "run"), "registry": {"enabled": True, "path": str(tmp_path / "registry.sqlite")}})
        processor = RunProcessor.from_config(cfg)
        yield processor
        processor.close()

    def test_registered_block_finishes_with_its_metrics(self, registry):
        with registry.registered("eval") as run:
            run_id = run.run_id
            run.record([("fused", "macro_f1", "", 0.9)])
        assert registry.run_id is None
        stored = registry.get_run(run_id)
        assert stored["status"] == RunStatusEnum.FINISHED
        assert stored["metrics"] == [("fused", "macro_f1", "", 0.9)]

    def test_failing_block_is_marked_error(self, registry):
        with pytest.raises(RuntimeError):
            with registry.registered("train"):
                raise RuntimeError("boom")
        [run] = registry.list_runs()
        assert run["status"] == RunStatusEnum.ERROR

    def test_list_runs_filters_and_limits(self, registry):
        for command in ("train", "eval", "train"):
            with registry.registered(command):
                pass
        assert [run["command"] for run in registry.list_runs()] == ["train", "eval", "train"]
        assert len(registry.list_runs(command="train")) == 2
        assert len(registry.list_runs(limit=1)) == 1

    def test_registry_file_stays_out_of_the_run_directory(self, registry, tmp_path):
        with registry.registered("bench"):
            pass
        assert (tmp_path / "registry.sqlite").exists()
        assert not (tmp_path / "run" / "registry.sqlite").exists()

    def test_disabled_registry_records_nothing_and_refuses_queries(self, tmp_path):
        processor = RunProcessor.from_config(RunConfig.from_dict({"out": str(tmp_path), "registry": {"enabled": False}}))
        assert not processor.enabled
        with processor.registered("train") as run:
            run.record([("fused", "accuracy", "", 1.0)])
            assert run.run_id is None
        with pytest.raises(ConfigError):
            processor.list_runs()

    def test_unreachable_registry_does_not_fail_the_stage(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        cfg = RunConfig.from_dict({"out": str(tmp_path), "registry": {"enabled": True, "path": str(blocker / "registry.sqlite")}})
        processor = RunProcessor.from_config(cfg)
        with processor.registered("train") as run:
            assert run.run_id is None
