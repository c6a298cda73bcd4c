# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: test_dataset.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module provides tests for synthetic corpus generation and the on-disk
# dataset layout (spectrogram pairs plus manifest).
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the project root to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from uwb_har.processors.dataset_processor import DatasetProcessor, HarnessError, Sample, Split, assert_disjoint, read_dataset
from uwb_har.run_config import RunConfig
from uwb_har.services.activities import Activity
from uwb_har.services.features import FeatureError, Normalization, Spectrogram, SpectrogramKind


def small_config(**overrides) -> RunConfig:
    data = {
        "threads": 1,
        "registry": {"enabled": False},
        "dataset": {"train_samples_per_class": 1, "test_samples_per_class": 1, "activities": ["walking", "F"]},
        "environments": {"train": [0, 1], "test": [2]},
    }
    data.update(overrides)
    return RunConfig.from_dict(data)


class TestGenerateDataset:
    """Test cases for corpus generation."""

    @pytest.fixture(scope="class")
    def corpus(self):
        return DatasetProcessor(small_config(), progress=False).generate_dataset()

    def test_sizes_and_splits(self, corpus):
        train, test = corpus
        assert (len(train), len(test)) == (4, 2)
        assert train.split == Split.TRAIN and test.split == Split.TEST
        assert train.environment_ids == {0, 1}
        assert test.environment_ids == {2}

    def test_classes_are_balanced(self, corpus):
        counts = corpus[0].class_counts()
        assert counts[Activity.WALKING] == counts[Activity.FALLING] == 2
        assert counts[Activity.BENDING] == 0

    def test_samples_are_normalized_spectrogram_pairs(self, corpus):
        sample = corpus[0].samples[0]
        assert sample.time.shape == sample.freq.shape == (400, 60)
        assert sample.time.kind == SpectrogramKind.TIME_DOMAIN
        assert sample.freq.kind == SpectrogramKind.DOPPLER_DOMAIN
        assert sample.time.normalization == Normalization.ZSCORE
        assert abs(sample.freq.data.mean()) < 1e-9

    def test_training_set_stacks_samples(self, corpus):
        data = corpus[0].training_set()
        assert data.time.shape == (4, 400, 60)
        np.testing.assert_array_equal(data.labels, corpus[0].labels)

    def test_same_seed_same_corpus(self, corpus):
        again, _ = DatasetProcessor(small_config(), progress=False).generate_dataset()
        for first, second in zip(corpus[0].samples, again.samples):
            np.testing.assert_array_equal(first.time.data, second.time.data)
            np.testing.assert_array_equal(first.freq.data, second.freq.data)

    def test_thread_count_does_not_change_the_corpus(self, corpus):
        threaded, _ = DatasetProcessor(small_config(threads=3), progress=False).generate_dataset()
        for first, second in zip(corpus[0].samples, threaded.samples):
            assert first.label == second.label
            np.testing.assert_array_equal(first.freq.data, second.freq.data)

    def test_sample_index_varies_the_scene(self):
        cfg = small_config(dataset={"train_samples_per_class": 2, "test_samples_per_class": 1, "activities": ["walking"]})
        train, _ = DatasetProcessor(cfg, progress=False).generate_dataset()
        first, second = train.samples[0], train.samples[1]
        assert first.environment_id == second.environment_id
        assert not np.array_equal(first.time.data, second.time.data)

    def test_overlapping_environments_rejected(self):
        with pytest.raises(HarnessError):
            DatasetProcessor(small_config(environments={"train": [0, 1], "test": [1]}), progress=False).generate_dataset()

    def test_single_training_environment_rejected(self):
        with pytest.raises(HarnessError):
            DatasetProcessor(small_config(environments={"train": [0], "test": [2]}), progress=False).generate_dataset()

    def test_assert_disjoint(self):
        assert_disjoint({0, 1}, {2, 3})
        with pytest.raises(HarnessError):
            assert_disjoint([0, 1], [3, 1])


class TestDatasetFiles:
    """Test cases for writing and reading the dataset directory."""

    def test_write_then_read(self, tmp_path):
        processor = DatasetProcessor(small_config(), progress=False)
        train, test = processor.generate_dataset()
        manifest = processor.write_dataset(tmp_path, (train, test))

        assert manifest == tmp_path / "manifest.tsv"
        lines = manifest.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "sample_path\tlabel\tenvironment_id\tsplit"
        assert len(lines) == 1 + len(train) + len(test)

        loaded = read_dataset(manifest)
        assert len(loaded[Split.TRAIN]) == 4 and len(loaded[Split.TEST]) == 2
        for original, restored in zip(train.samples, loaded[Split.TRAIN].samples):
            assert restored.label == original.label
            assert restored.environment_id == original.environment_id
            np.testing.assert_allclose(restored.time.data, original.time.data, rtol=1e-6, atol=1e-6)
            assert restored.freq.normalization == Normalization.ZSCORE

    def test_load_or_generate_reuses_a_written_manifest(self, tmp_path):
        processor = DatasetProcessor(small_config(), progress=False)
        train, test = processor.load_or_generate(None, tmp_path / "dataset")
        again_train, again_test = processor.load_or_generate(tmp_path / "dataset" / "manifest.tsv")
        assert (len(again_train), len(again_test)) == (len(train), len(test))
        assert [s.label for s in again_train.samples] == [s.label for s in train.samples]

    def test_corpus_of_another_window_geometry_is_rejected(self, tmp_path):
        processor = DatasetProcessor(small_config(), progress=False)
        manifest = processor.write_dataset(tmp_path, processor.generate_dataset())
        assert len(read_dataset(manifest, (400, 60))[Split.TEST]) == 2
        with pytest.raises(FeatureError):
            read_dataset(manifest, (200, 60))

    def test_sample_pair_must_match(self):
        time = Spectrogram(data=np.zeros((4, 6)), kind=SpectrogramKind.TIME_DOMAIN)
        with pytest.raises(FeatureError):
            Sample(time=time, freq=Spectrogram(data=np.zeros((4, 5)), kind=SpectrogramKind.DOPPLER_DOMAIN), label=Activity.WALKING, environment_id=0)
        with pytest.raises(HarnessError):
            Sample(time=time, freq=time, label=Activity.WALKING, environment_id=0)

    def test_unknown_label_in_manifest(self, tmp_path):
        (tmp_path / "manifest.tsv").write_text("sample_path\tlabel\tenvironment_id\tsplit\nx.uwbf\tjumping\t0\ttrain\n", encoding="utf-8")
        with pytest.raises(HarnessError):
            read_dataset(tmp_path / "manifest.tsv")
