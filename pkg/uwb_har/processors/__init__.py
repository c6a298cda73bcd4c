# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/processors/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module initializes the processors package for UWB-HAR.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from uwb_har.processors.dataset_processor import Dataset, DatasetProcessor, HarnessError, Sample, Split, read_dataset
from uwb_har.processors.evaluation_processor import ConfigResult, DetectorResult, EvaluationProcessor, MetricsReport, eval_detector
from uwb_har.processors.pipeline_processor import BenchStats, Inference, PipelineProcessor, load_weights, save_weights
from uwb_har.processors.run_processor import RunProcessor

__all__ = [
    "BenchStats",
    "ConfigResult",
    "Dataset",
    "DatasetProcessor",
    "DetectorResult",
    "EvaluationProcessor",
    "HarnessError",
    "Inference",
    "MetricsReport",
    "PipelineProcessor",
    "RunProcessor",
    "Sample",
    "Split",
    "eval_detector",
    "load_weights",
    "read_dataset",
    "save_weights",
]
