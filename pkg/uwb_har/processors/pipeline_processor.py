# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/processors/pipeline_processor.py
# ----------------------------------------------------------------------------------
# Purpose:
# File-level pipeline stages behind the CLI, held by PipelineProcessor: simulate
# a scene to a frame file, preprocess it, run the motion detector, featurize a
# window, classify motion-gated windows and benchmark inference latency. Network
# weights are saved and loaded here as well.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import yaml
from tqdm import tqdm

from uwb_har.nn.network import FusionNetwork
from uwb_har.processors.dataset_processor import HarnessError, featurize_window, scene_window
from uwb_har.processors.run_processor import RunProcessor
from uwb_har.run_config import ConfigError, RunConfig
from uwb_har.services.activities import Activity, build_scene
from uwb_har.services.channel import FrameMatrix, MotionProfile, NoiseModel, PathModel, simulate_activity
from uwb_har.services.dsp import detect_stream, detect_window, preprocess
from uwb_har.services.features import Spectrogram
from uwb_har.utils.formats import FormatError, read_frames, read_weights, write_frames, write_spectrogram_pair, write_weights
from uwb_har.utils.logger import get_logger

__all__ = [
    "BenchStats",
    "Inference",
    "PipelineProcessor",
    "load_weights",
    "save_weights",
]

NO_MOTION = "no-motion"


def save_weights(net: FusionNetwork, path: str | Path) -> Path:
    """Every parameter tensor in declaration order, tagged with its layer's op kind."""
    entries = [(f"{layer.name}.{key}", layer.spec.op_kind.value, value) for layer in net.layers for key, value in layer.params.items()]
    return write_weights(path, entries)


def load_weights(net: FusionNetwork, path: str | Path) -> FusionNetwork:
    """Load a weights file into `net`; the file's layer table must match the network exactly."""
    entries = read_weights(path)
    expected = [(f"{layer.name}.{key}", layer.spec.op_kind.value, value.shape) for layer in net.layers for key, value in layer.params.items()]
    found = [(name, kind, array.shape) for name, kind, array in entries]
    if found != expected:
        raise FormatError(f"{path}: layer table does not match the configured network", operation="load_weights")
    net.load_parameters({name: array for name, _, array in entries})
    return net


def _load_scene_file(path: str | Path) -> Mapping[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot load scene file {path}: {e}", operation="simulate", original_error=e)
    if not isinstance(data, Mapping):
        raise ConfigError(f"scene file {path} must be a mapping at the top level", operation="simulate")
    unknown = sorted(set(data) - {"profile", "static_paths", "noise", "duration_s"})
    if unknown or "profile" not in data:
        raise ConfigError(f"scene file {path} needs a 'profile' and allows static_paths, noise, duration_s; unknown {unknown}", operation="simulate")
    if not isinstance(data["profile"], Mapping):
        raise ConfigError(f"scene file {path}: 'profile' must be a mapping", operation="simulate")
    return data


@dataclass(frozen=True)
class Inference:
    window_start: int
    detected: bool
    label: str
    confidence: float

    def as_line(self) -> str:
        return f"{self.window_start}, {self.label}, {self.confidence:.6f}"


@dataclass(frozen=True)
class BenchStats:
    runs: int
    min_s: float
    median_s: float
    p95_s: float

    def to_dict(self) -> dict[str, float]:
        return {"runs": self.runs, "min_ms": self.min_s * 1e3, "median_ms": self.median_s * 1e3, "p95_ms": self.p95_s * 1e3}

    def as_line(self) -> str:
        return f"runs={self.runs} min_ms={self.min_s * 1e3:.3f} median_ms={self.median_s * 1e3:.3f} p95_ms={self.p95_s * 1e3:.3f}"

class PipelineProcessor:
    """Processor for the file-level stages: simulate, preprocess, detect, featurize, infer and bench."""

    def __init__(self, cfg: RunConfig, registry: Optional[RunProcessor] = None, progress: bool = True):
        self._cfg = cfg
        self._registry = registry
        self._progress = progress
        self._logger = get_logger()

    def simulate(
        self,
        out_path: str | Path,
        activity: Activity | None = None,
        env_id: int | None = None,
        distance_m: float | None = None,
        sample_index: int = 0,
        scene_path: str | Path | None = None,
        occupied: bool = True,
    ) -> FrameMatrix:
        """Simulate a scripted activity (or a scene file) and write the raw frame matrix."""
        cfg = self._cfg
        if scene_path is not None:
            data = _load_scene_file(scene_path)
            try:
                profile = MotionProfile.from_dict(data["profile"])
                static_paths = [PathModel.from_dict(path) for path in data.get("static_paths", [])]
                noise = NoiseModel(**(data.get("noise") or {}))
                duration = float(data.get("duration_s", profile.total_duration_s))
            except (TypeError, ValueError, KeyError, AttributeError) as e:
                raise ConfigError(f"invalid scene file {scene_path}: {e}", operation="simulate", original_error=e)
            frames = simulate_activity(cfg.radio, static_paths, profile, noise, duration)
        else:
            env = cfg.environment(cfg.environments.test[0] if env_id is None else env_id)
            scene = build_scene(activity, env, cfg.scene, cfg.seed, distance_m=distance_m, sample_index=sample_index, occupied=occupied)
            frames = simulate_activity(cfg.radio, scene.static_paths, scene.profile, scene.noise, scene.duration_s)
        write_frames(out_path, frames)
        return frames

    def preprocess(self, in_path: str | Path, out_path: str | Path) -> FrameMatrix:
        """Phase-correct, filter and background-subtract a raw frame file into a new frame file."""
        frames = preprocess(read_frames(in_path))
        write_frames(out_path, frames)
        return frames

    def detect(self, in_path: str | Path, hop_frames: int | None = None) -> list[str]:
        """One `window_start_frame, detected, peak_bin, peak_sd, threshold` line per window of a preprocessed file."""
        frames = read_frames(in_path)
        return [report.as_line(start) for start, report in detect_stream(frames, self._cfg.detector, hop_frames)]

    def featurize(self, in_path: str | Path, out_path: str | Path) -> tuple[Spectrogram, Spectrogram]:
        """Spectrogram pair of the trailing window of a preprocessed frame file."""
        window_frames = self._cfg.detector.window_frames
        frames = read_frames(in_path)
        if frames.n_frames < window_frames:
            raise HarnessError(f"{in_path} holds {frames.n_frames} frames, fewer than one window", operation="featurize")
        time_spec, freq_spec = featurize_window(frames.last(window_frames))
        write_spectrogram_pair(out_path, time_spec, freq_spec, frames.radio)
        return time_spec, freq_spec

    def network(self, weights_path: str | Path | None = None) -> FusionNetwork:
        """The configured network, loaded from `weights_path` or freshly initialized from the seed."""
        net = FusionNetwork(self._cfg.network_spec(), seed=self._cfg.seed, dtype=self._cfg.training.dtype)
        if weights_path is not None:
            load_weights(net, weights_path)
        return net

    def infer(self, net: FusionNetwork, in_path: str | Path, hop_frames: int | None = None) -> list[Inference]:
        """Classify the windows of a raw frame file; windows without motion never reach the network."""
        window_frames = self._cfg.detector.window_frames
        frames = preprocess(read_frames(in_path))
        results = []
        for start, report in detect_stream(frames, self._cfg.detector, hop_frames):
            if not report.detected:
                results.append(Inference(start, False, NO_MOTION, 0.0))
                continue
            time_spec, freq_spec = featurize_window(frames.window(start, window_frames))
            probabilities = net.forward(time_spec, freq_spec)
            best = int(np.argmax(probabilities))
            results.append(Inference(start, True, Activity.from_index(best).value, float(probabilities[best])))
        self._logger.info(f"Inference on {in_path}: {sum(r.detected for r in results)} of {len(results)} windows classified")
        return results

    def bench(self, net: FusionNetwork, runs: int | None = None) -> BenchStats:
        """Wall-clock latency of single-window inference (detection, features and forward pass)."""
        cfg = self._cfg
        runs = runs or cfg.bench.runs
        env = cfg.environment(cfg.environments.test[0])
        window = scene_window(build_scene(Activity.WALKING, env, cfg.scene, cfg.seed), cfg)

        def infer_once() -> None:
            detect_window(window, cfg.detector)
            net.forward(*featurize_window(window))

        for _ in range(cfg.bench.warmup):
            infer_once()
        timings = np.empty(runs)
        for run in tqdm(range(runs), desc="bench", unit="run", disable=not self._progress):
            started = time.perf_counter()
            infer_once()
            timings[run] = time.perf_counter() - started
        stats = BenchStats(runs=runs, min_s=float(timings.min()), median_s=float(np.median(timings)), p95_s=float(np.percentile(timings, 95)))
        self._logger.info(f"Bench: {stats.as_line()}")
        if self._registry is not None:
            self._registry.record([("", name, "", value) for name, value in stats.to_dict().items()])
        return stats
