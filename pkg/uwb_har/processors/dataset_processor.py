# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/processors/dataset_processor.py
# ----------------------------------------------------------------------------------
# Purpose:
# Synthetic corpus generation. Every sample is a scripted activity in one
# simulated environment, run through preprocessing and turned into a normalized
# time / Doppler spectrogram pair. Training and test sets come from disjoint
# environment ids. Samples are generated concurrently and reassembled in a fixed
# order, so a seed always yields the same corpus.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from tqdm import tqdm

from uwb_har.nn.training import TrainingSet
from uwb_har.run_config import RunConfig
from uwb_har.services.activities import Activity, Environment, Scene, build_scene
from uwb_har.services.channel import FrameMatrix, simulate_activity
from uwb_har.services.dsp import detect_window, preprocess
from uwb_har.services.features import Spectrogram, SpectrogramKind, doppler_spectrogram, normalize, time_spectrogram
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.formats import ManifestEntry, read_manifest, read_spectrogram_pair, write_manifest, write_spectrogram_pair
from uwb_har.utils.logger import get_logger

__all__ = [
    "Dataset",
    "DatasetProcessor",
    "HarnessError",
    "Sample",
    "Split",
    "assert_disjoint",
    "featurize_window",
    "read_dataset",
    "scene_window",
]


class HarnessError(UwbHarError):
    """Exception raised by dataset generation and evaluation."""


class Split(Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True, eq=False)
class Sample:
    time: Spectrogram
    freq: Spectrogram
    label: Activity
    environment_id: int
    motion_detected: bool = True

    def __post_init__(self) -> None:
        if (self.time.kind, self.freq.kind) != (SpectrogramKind.TIME_DOMAIN, SpectrogramKind.DOPPLER_DOMAIN):
            raise HarnessError("a sample pairs a time-domain and a Doppler spectrogram", operation="Sample")
        self.freq.check_shape(self.time.shape, operation="Sample")


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple[Sample, ...]
    split: Split

    def __post_init__(self) -> None:
        for sample in self.samples:
            if not isinstance(sample.label, Activity):
                raise HarnessError(f"sample label {sample.label!r} is not one of the 7 classes", operation="Dataset")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def environment_ids(self) -> set[int]:
        return {sample.environment_id for sample in self.samples}

    @property
    def labels(self) -> np.ndarray:
        return np.array([sample.label.index for sample in self.samples], dtype=np.int64)

    def class_counts(self) -> dict[Activity, int]:
        counts = {activity: 0 for activity in Activity}
        for sample in self.samples:
            counts[sample.label] += 1
        return counts

    def training_set(self) -> TrainingSet:
        if not self.samples:
            raise HarnessError(f"{self.split.value} set is empty", operation="training_set")
        return TrainingSet(
            time=np.stack([sample.time.data for sample in self.samples]),
            freq=np.stack([sample.freq.data for sample in self.samples]),
            labels=self.labels,
        )


def assert_disjoint(train_ids, test_ids) -> None:
    """Training and test data must come from different environments."""
    overlap = sorted(set(train_ids) & set(test_ids))
    if overlap:
        raise HarnessError(f"environment ids {overlap} appear in both splits", operation="assert_disjoint")


def scene_window(scene: Scene, cfg: RunConfig) -> FrameMatrix:
    """Simulate a scene, preprocess it and keep the trailing analysis window."""
    frames = simulate_activity(cfg.radio, scene.static_paths, scene.profile, scene.noise, scene.duration_s)
    return preprocess(frames).last(cfg.detector.window_frames)


def featurize_window(window: FrameMatrix) -> tuple[Spectrogram, Spectrogram]:
    n = window.n_frames
    return normalize(time_spectrogram(window, n)), normalize(doppler_spectrogram(window, n))


def _make_sample(job: tuple[Activity, Environment, int], cfg: RunConfig) -> Sample:
    activity, env, index = job
    scene = build_scene(activity, env, cfg.scene, cfg.seed, sample_index=index)
    window = scene_window(scene, cfg)
    detected = detect_window(window, cfg.detector).detected if cfg.dataset.check_motion else True
    time, freq = featurize_window(window)
    return Sample(time=time, freq=freq, label=activity, environment_id=env.env_id, motion_detected=detected)


class DatasetProcessor:
    """Processor for generating and storing the synthetic corpus of one run configuration."""

    def __init__(self, cfg: RunConfig, progress: bool = True):
        self._cfg = cfg
        self._progress = progress
        self._logger = get_logger()

    def _generate_split(self, split: Split, env_ids: tuple[int, ...], per_class: int) -> Dataset:
        cfg = self._cfg
        jobs = [(activity, cfg.environment(env_id), index) for env_id in env_ids for activity in cfg.activities() for index in range(per_class)]
        bar = tqdm(total=len(jobs), desc=f"{split.value} set", unit="sample", disable=not self._progress)

        def run(job):
            sample = _make_sample(job, cfg)
            bar.update(1)
            return sample

        try:
            if cfg.threads > 1:
                with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                    samples = tuple(pool.map(run, jobs))
            else:
                samples = tuple(run(job) for job in jobs)
        finally:
            bar.close()

        missed = sum(1 for sample in samples if not sample.motion_detected)
        if missed:
            self._logger.warning(f"{missed} of {len(samples)} {split.value} samples did not trigger the motion detector")
        return Dataset(samples=samples, split=split)

    def generate_dataset(self) -> tuple[Dataset, Dataset]:
        """Build the (train, test) datasets; balanced classes, deterministic under the seed."""
        cfg = self._cfg
        train_ids, test_ids = cfg.environments.train, cfg.environments.test
        if len(set(train_ids)) < 2 or len(set(test_ids)) < 1:
            raise HarnessError(f"need >= 2 train and >= 1 test environments, got {train_ids} / {test_ids}", operation="generate_dataset")
        assert_disjoint(train_ids, test_ids)

        self._logger.info(f"Generating dataset: train envs {train_ids}, test envs {test_ids}, seed {cfg.seed}")
        train = self._generate_split(Split.TRAIN, train_ids, cfg.dataset.train_samples_per_class)
        test = self._generate_split(Split.TEST, test_ids, cfg.dataset.test_samples_per_class)
        self._logger.info(f"Dataset ready: {len(train)} train / {len(test)} test samples")
        return train, test

    def write_dataset(self, out_dir: str | Path, datasets: tuple[Dataset, ...]) -> Path:
        """Write every sample as a spectrogram-pair file plus `manifest.tsv`; returns the manifest path."""
        out_dir = Path(out_dir)
        entries = []
        for dataset in datasets:
            counters: dict[tuple[int, Activity], int] = {}
            for sample in dataset.samples:
                key = (sample.environment_id, sample.label)
                counters[key] = counters.get(key, 0) + 1
                relative = Path("samples") / dataset.split.value / f"env{sample.environment_id}_{sample.label.code}_{counters[key] - 1:04d}.uwbf"
                write_spectrogram_pair(out_dir / relative, sample.time, sample.freq, self._cfg.radio)
                entries.append(ManifestEntry(relative.as_posix(), sample.label.value, sample.environment_id, dataset.split.value))
        manifest = write_manifest(out_dir / "manifest.tsv", entries)
        self._logger.info(f"Wrote {len(entries)} samples and manifest {manifest}")
        return manifest

    def load_or_generate(self, manifest: str | Path | None, out_dir: str | Path | None = None) -> tuple[Dataset, Dataset]:
        """Reuse a manifest when given; otherwise generate, and write the corpus under `out_dir` when set."""
        if manifest:
            datasets = read_dataset(manifest, self._cfg.input_shape)
            return datasets[Split.TRAIN], datasets[Split.TEST]
        train_set, test_set = self.generate_dataset()
        if out_dir is not None:
            self.write_dataset(out_dir, (train_set, test_set))
        return train_set, test_set


def read_dataset(manifest_path: str | Path, expected_shape: tuple[int, int] | None = None) -> dict[Split, Dataset]:
    """Load the datasets listed in a manifest; sample paths are relative to the manifest.

    With `expected_shape`, every spectrogram must have that (frames, bins) shape, so a corpus
    written under another window or radio geometry is rejected before it reaches a network.
    """
    manifest_path = Path(manifest_path)
    grouped: dict[Split, list[Sample]] = {Split.TRAIN: [], Split.TEST: []}
    for entry in read_manifest(manifest_path):
        try:
            split = Split(entry.split)
            label = Activity.parse(entry.label)
        except (ValueError, UwbHarError) as e:
            raise HarnessError(f"manifest entry {entry.sample_path}: {e}", operation="read_dataset", original_error=e)
        time, freq = read_spectrogram_pair(manifest_path.parent / entry.sample_path)
        if expected_shape is not None:
            time.check_shape(expected_shape, operation="read_dataset")
        grouped[split].append(Sample(time=time, freq=freq, label=label, environment_id=entry.environment_id))
    datasets = {split: Dataset(samples=tuple(samples), split=split) for split, samples in grouped.items()}
    assert_disjoint(datasets[Split.TRAIN].environment_ids, datasets[Split.TEST].environment_ids)
    return datasets
