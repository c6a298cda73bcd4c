# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: test_cli.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module provides end-to-end tests of the command-line entry point: exit
# codes, the single-line error contract and small runs of every pipeline stage.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import json
import sys
from pathlib import Path

import pytest
import yaml

# Add the project root to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from uwb_har import crud
from uwb_har.cli import run
from uwb_har.models import RunStatusEnum
from uwb_har.nn.network import FusionNetwork
from uwb_har.processors.pipeline_processor import PipelineProcessor
from uwb_har.run_config import RunConfig
from uwb_har.utils.database import DatabaseManager
from uwb_har.utils.formats import read_frames, read_spectrogram_pair

SMALL_RUN = {
    "threads": 1,
    "registry": {"enabled": False},
    "dataset": {"train_samples_per_class": 1, "test_samples_per_class": 1, "activities": ["walking", "falling"]},
    "environments": {"train": [0, 1], "test": [2]},
    "network": {"channels": [4, 8, 8], "reduce_groups": [1, 2, 2], "head_hidden": 8},
    "training": {"epochs": 1, "batch_size": 4},
}


def _config(tmp_path: Path, data: dict) -> str:
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return str(path)


def _stderr_line(capsys) -> str:
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return lines[0]


class TestExitCodes:
    """Test cases for the error contract."""

    def test_invalid_config_key_exits_2(self, tmp_path, capsys):
        assert run(["params", "--config", _config(tmp_path, {"radio": {"bogus": 1}})]) == 2
        line = _stderr_line(capsys)
        assert line.startswith("error kind=config ")
        assert "radio.bogus" in line

    def test_unknown_activity_exits_2(self, tmp_path, capsys):
        assert run(["simulate", "--activity", "jumping", "--out", str(tmp_path)]) == 2
        assert _stderr_line(capsys).startswith("error kind=usage ")

    def test_missing_subcommand_exits_2(self, capsys):
        assert run([]) == 2
        assert "kind=usage" in _stderr_line(capsys)

    def test_bench_needs_a_thousand_runs(self, tmp_path, capsys):
        assert run(["bench", "--runs", "10", "--config", _config(tmp_path, SMALL_RUN)]) == 2
        assert "--runs" in _stderr_line(capsys)

    def test_scalar_scene_profile_exits_2(self, tmp_path, capsys):
        scene = tmp_path / "scene.yaml"
        scene.write_text("profile: 3\n", encoding="utf-8")
        assert run(["simulate", "--scene", str(scene), "--output", str(tmp_path / "f.uwbf")]) == 2
        assert _stderr_line(capsys).startswith("error kind=config operation=simulate ")

    def test_unexpected_exception_exits_1_with_one_line(self, tmp_path, capsys, monkeypatch):
        def fail(*args, **kwargs):
            raise RuntimeError("worker crashed")

        monkeypatch.setattr(PipelineProcessor, "preprocess", fail)
        assert run(["preprocess", str(tmp_path / "frames.uwbf"), "--out", str(tmp_path)]) == 1
        assert _stderr_line(capsys) == 'error kind=internal operation=cli message="worker crashed"'

    def test_runs_with_disabled_registry_exits_2(self, tmp_path, capsys):
        assert run(["runs", "--config", _config(tmp_path, SMALL_RUN)]) == 2
        assert _stderr_line(capsys).startswith("error kind=config operation=runs ")

    def test_runs_unknown_id_exits_1(self, tmp_path, capsys):
        data = SMALL_RUN | {"registry": {"enabled": True, "path": str(tmp_path / "registry.sqlite")}}
        assert run(["runs", "--config", _config(tmp_path, data), "--id", "404"]) == 1
        assert _stderr_line(capsys).startswith("error kind=not-found operation=runs ")

    def test_missing_input_file_exits_1(self, tmp_path, capsys):
        assert run(["preprocess", str(tmp_path / "missing.uwbf"), "--out", str(tmp_path)]) == 1
        assert _stderr_line(capsys).startswith("error kind=invalid-format ")

    def test_help_exits_0(self, capsys):
        assert run(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out


class TestParams:
    def test_totals_match_network_accounting(self, capsys):
        assert run(["params"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        net = FusionNetwork(RunConfig.from_dict({}).network_spec())
        assert lines[-2] == f"total params {net.param_count}"
        assert lines[-1] == f"total FLOPs {net.flop_count()}"
        assert lines[0].split()[:3] == ["name", "kind", "k"]


class TestPipeline:
    """simulate -> preprocess -> detect -> featurize, then train -> eval -> infer."""

    def test_signal_stages(self, tmp_path, capsys):
        out = str(tmp_path)
        assert run(["simulate", "--activity", "W", "--out", out, "--quiet"]) == 0
        assert (tmp_path / "frames.uwbf").exists()
        assert run(["preprocess", str(tmp_path / "frames.uwbf"), "--out", out]) == 0
        assert read_frames(tmp_path / "preprocessed.uwbf").data.shape == (600, 60)
        capsys.readouterr()

        assert run(["detect", str(tmp_path / "preprocessed.uwbf"), "--out", out, "--hop", "100"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split(", ")[0] for line in lines] == ["0", "100", "200"]
        assert all(line.split(", ")[1] in ("true", "false") for line in lines)

        assert run(["featurize", str(tmp_path / "preprocessed.uwbf"), "--out", out]) == 0
        time_spec, freq_spec = read_spectrogram_pair(tmp_path / "features.uwbf")
        assert time_spec.shape == freq_spec.shape == (400, 60)

    def test_simulation_is_byte_identical_on_rerun(self, tmp_path):
        first, second = tmp_path / "a.uwbf", tmp_path / "b.uwbf"
        assert run(["simulate", "--activity", "bending", "--seed", "3", "--output", str(first)]) == 0
        assert run(["simulate", "--activity", "bending", "--seed", "3", "--output", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_empty_room_simulation(self, tmp_path):
        assert run(["simulate", "--activity", "empty", "--output", str(tmp_path / "empty.uwbf")]) == 0
        assert read_frames(tmp_path / "empty.uwbf").n_frames == 600

    def test_train_eval_infer(self, tmp_path, capsys):
        registry_path = tmp_path / "shared" / "registry.sqlite"
        data = SMALL_RUN | {"registry": {"enabled": True, "path": str(registry_path)}}
        config, out = _config(tmp_path, data), str(tmp_path / "run")
        assert run(["train", "--config", config, "--out", out, "--quiet"]) == 0
        run_dir = tmp_path / "run"
        assert (run_dir / "weights.sanw").exists()
        assert (run_dir / "dataset" / "manifest.tsv").exists()
        history = json.loads((run_dir / "train_history.json").read_text(encoding="utf-8"))
        assert len(history["epoch_losses"]) == 1 and history["samples"] == 4

        assert run(["eval", "--config", config, "--out", out]) == 0
        metrics = json.loads((run_dir / "metrics.json").read_text(encoding="utf-8"))
        assert 0.0 <= metrics["macro_f1"] <= 1.0
        assert (run_dir / "confusion.csv").read_text(encoding="utf-8").startswith("true/predicted,B,F,L,SU,SD,SQ,W")

        assert run(["simulate", "--activity", "walking", "--config", config, "--out", out]) == 0
        capsys.readouterr()
        assert run(["infer", str(run_dir / "frames.uwbf"), "--config", config, "--out", out]) == 0
        line = capsys.readouterr().out.strip().splitlines()[0]
        assert line.split(", ")[0] == "0"

        assert not (run_dir / "registry.sqlite").exists()
        manager = DatabaseManager.for_registry(None, registry_path)
        runs = crud.list_runs(manager)
        manager.close()
        assert [(entry["command"], entry["status"]) for entry in runs] == [("eval", RunStatusEnum.FINISHED), ("train", RunStatusEnum.FINISHED)]

        capsys.readouterr()
        assert run(["runs", "--config", config, "--command", "train"]) == 0
        [train_line] = capsys.readouterr().out.strip().splitlines()
        assert train_line.split()[1:3] == ["train", "FINISHED"]

        assert run(["runs", "--config", config, "--id", str(runs[0]["id"])]) == 0
        shown = capsys.readouterr().out.strip().splitlines()
        assert shown[0].split()[1] == "eval"
        assert any(line.split()[1] == "macro_f1" for line in shown[1:])

    def test_eval_without_weights_exits_1(self, tmp_path, capsys):
        assert run(["eval", "--config", _config(tmp_path, SMALL_RUN), "--out", str(tmp_path)]) == 1
        assert "kind=invalid-format" in _stderr_line(capsys)


@pytest.mark.slow
class TestBench:
    def test_latency_is_stable(self, tmp_path):
        assert run(["bench", "--config", _config(tmp_path, SMALL_RUN), "--out", str(tmp_path), "--quiet"]) == 0
        stats = json.loads((tmp_path / "bench.json").read_text(encoding="utf-8"))
        assert stats["runs"] == 1000
        assert stats["p95_ms"] / stats["median_ms"] < 2
