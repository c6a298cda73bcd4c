# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/processors/evaluation_processor.py
# ----------------------------------------------------------------------------------
# Purpose:
# Evaluation harness: classification metrics derived from the confusion matrix,
# motion detector TPR / FAR over labeled windows, the branch ablation, the kernel
# size sweep, the detection range sweep and the noise-only false alarm run.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from tqdm import tqdm

from uwb_har.nn.network import FusionNetwork
from uwb_har.nn.specs import NUM_CLASSES, NetworkSpec
from uwb_har.nn.training import TrainingHistory, train
from uwb_har.processors.dataset_processor import Dataset, HarnessError, assert_disjoint, scene_window
from uwb_har.processors.run_processor import MetricRow, RunProcessor
from uwb_har.run_config import RunConfig
from uwb_har.services.activities import Activity, build_scene
from uwb_har.services.channel import FrameMatrix
from uwb_har.services.dsp import DetectorConfig, detect_window
from uwb_har.utils.logger import get_logger

__all__ = [
    "CLASS_LABELS",
    "ConfigResult",
    "DetectorResult",
    "EvaluationProcessor",
    "MetricsReport",
    "confusion_matrix",
    "eval_detector",
    "evaluate_predictions",
]

CLASS_LABELS = tuple(activity.code for activity in Activity)


def confusion_matrix(true: Sequence[int], predicted: Sequence[int], n_classes: int = NUM_CLASSES) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    true, predicted = np.asarray(true, dtype=np.int64), np.asarray(predicted, dtype=np.int64)
    if true.shape != predicted.shape:
        raise HarnessError("true and predicted labels differ in length", operation="confusion_matrix")
    if true.size and (min(true.min(), predicted.min()) < 0 or max(true.max(), predicted.max()) >= n_classes):
        raise HarnessError(f"labels must lie in [0, {n_classes})", operation="confusion_matrix")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, predicted), 1)
    return confusion


def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    # 0 where the denominator is 0 (no predictions / no samples of that class).
    return np.divide(numerator, denominator, out=np.zeros(numerator.shape, dtype=np.float64), where=denominator > 0)


@dataclass(frozen=True, eq=False)
class MetricsReport:
    confusion: np.ndarray
    labels: tuple[str, ...]
    precision: np.ndarray = field(init=False)
    recall: np.ndarray = field(init=False)
    f1: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1] or confusion.shape[0] != len(self.labels):
            raise HarnessError(f"confusion matrix {confusion.shape} does not match {len(self.labels)} labels", operation="MetricsReport")
        tp = np.diag(confusion).astype(np.float64)
        precision = _ratio(tp, confusion.sum(axis=0).astype(np.float64))
        recall = _ratio(tp, confusion.sum(axis=1).astype(np.float64))
        f1 = _ratio(2 * precision * recall, precision + recall)
        object.__setattr__(self, "confusion", confusion)
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "recall", recall)
        object.__setattr__(self, "f1", f1)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.total) if self.total else 0.0

    @property
    def macro_precision(self) -> float:
        return float(self.precision.mean())

    @property
    def macro_recall(self) -> float:
        return float(self.recall.mean())

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    def to_dict(self) -> dict:
        per_class = {
            label: {"precision": float(p), "recall": float(r), "f1": float(f), "support": int(s)}
            for label, p, r, f, s in zip(self.labels, self.precision, self.recall, self.f1, self.confusion.sum(axis=1))
        }
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class": per_class,
            "confusion": self.confusion.tolist(),
            "labels": list(self.labels),
        }

    def metric_rows(self, config_name: str = "") -> list[tuple[str, str, str, float]]:
        """(config_name, metric, class_label, value) rows for the run registry."""
        rows = [(config_name, name, "", value) for name, value in (("accuracy", self.accuracy), ("macro_f1", self.macro_f1))]
        rows += [(config_name, "macro_precision", "", self.macro_precision), (config_name, "macro_recall", "", self.macro_recall)]
        for label, p, r, f in zip(self.labels, self.precision, self.recall, self.f1):
            rows += [(config_name, "precision", label, float(p)), (config_name, "recall", label, float(r)), (config_name, "f1", label, float(f))]
        return rows

    def table(self) -> str:
        lines = [f"{'class':<6} {'precision':>9} {'recall':>9} {'f1':>9} {'support':>8}"]
        for label, p, r, f, s in zip(self.labels, self.precision, self.recall, self.f1, self.confusion.sum(axis=1)):
            lines.append(f"{label:<6} {p:>9.4f} {r:>9.4f} {f:>9.4f} {int(s):>8d}")
        lines.append(f"{'macro':<6} {self.macro_precision:>9.4f} {self.macro_recall:>9.4f} {self.macro_f1:>9.4f} {self.total:>8d}")
        lines.append(f"accuracy {self.accuracy:.4f}")
        return "\n".join(lines)


def evaluate_predictions(true: Sequence[int], predicted: Sequence[int], labels: Sequence[str] = CLASS_LABELS) -> MetricsReport:
    """Score predicted class indices against the true ones."""
    return MetricsReport(confusion=confusion_matrix(true, predicted, len(labels)), labels=tuple(labels))


@dataclass(frozen=True)
class DetectorResult:
    motion_windows: int
    detections: int
    noise_windows: int
    false_alarms: int

    @property
    def tpr(self) -> float:
        if self.motion_windows == 0:
            raise HarnessError("TPR is undefined without motion windows", operation="eval_detector", kind="undefined-metric")
        return self.detections / self.motion_windows

    @property
    def far_per_window(self) -> float:
        if self.noise_windows == 0:
            raise HarnessError("FAR is undefined without no-motion windows", operation="eval_detector", kind="undefined-metric")
        return self.false_alarms / self.noise_windows


def eval_detector(windows: Iterable[tuple[FrameMatrix, bool]], cfg: DetectorConfig, require_both: bool = True) -> DetectorResult:
    """Score the detector on preprocessed windows labeled with whether they contain motion.

    With `require_both` an empty category raises an undefined-metric error immediately.
    """
    counts = {"motion_windows": 0, "detections": 0, "noise_windows": 0, "false_alarms": 0}
    for window, has_motion in windows:
        detected = detect_window(window, cfg).detected
        if has_motion:
            counts["motion_windows"] += 1
            counts["detections"] += int(detected)
        else:
            counts["noise_windows"] += 1
            counts["false_alarms"] += int(detected)
    result = DetectorResult(**counts)
    if require_both and (result.motion_windows == 0 or result.noise_windows == 0):
        raise HarnessError("TPR and FAR need both motion and no-motion windows", operation="eval_detector", kind="undefined-metric")
    return result


@dataclass(frozen=True)
class ConfigResult:
    name: str
    report: MetricsReport
    param_count: int
    final_loss: float


class EvaluationProcessor:
    """Processor for training, scoring and comparing networks and for scoring the motion detector.

    Metric rows go to the registry run that is open on `registry`, if any.
    """

    def __init__(self, cfg: RunConfig, registry: Optional[RunProcessor] = None, progress: bool = True):
        self._cfg = cfg
        self._registry = registry
        self._progress = progress
        self._logger = get_logger()

    def _record(self, rows: list[MetricRow]) -> None:
        if self._registry is not None:
            self._registry.record(rows)

    def train_network(self, train_set: Dataset, spec: Optional[NetworkSpec] = None, config_name: str = "") -> tuple[FusionNetwork, TrainingHistory]:
        """Train a fresh network (the configured layout unless `spec` is given) seeded from the run seed."""
        cfg = self._cfg
        net = FusionNetwork(spec or cfg.network_spec(), seed=cfg.seed, dtype=cfg.training.dtype)
        history = train(net, train_set.training_set(), cfg.training, seed=cfg.seed, progress=self._progress)
        self._record([(config_name, "final_loss", "", history.final_loss)])
        return net, history

    def evaluate(self, net: FusionNetwork, dataset: Dataset, config_name: str = "") -> MetricsReport:
        """Classify every sample of a dataset and score the predictions."""
        if len(dataset) == 0:
            raise HarnessError("cannot evaluate on an empty dataset", operation="evaluate")
        data = dataset.training_set()
        probabilities = net.predict(data.time, data.freq, workers=self._cfg.threads)
        report = evaluate_predictions(data.labels, probabilities.argmax(axis=1))
        self._logger.info(f"Evaluated {len(dataset)} samples: accuracy {report.accuracy:.4f}, macro-F1 {report.macro_f1:.4f}")
        self._record(report.metric_rows(config_name))
        return report

    def _compare(self, train_set: Dataset, test_set: Dataset, specs: dict[str, NetworkSpec]) -> list[ConfigResult]:
        assert_disjoint(train_set.environment_ids, test_set.environment_ids)
        results = []
        for name, spec in specs.items():
            self._logger.info(f"Training configuration '{name}'")
            tag = f"{name}@{self._cfg.seed}"
            net, history = self.train_network(train_set, spec, config_name=tag)
            report = self.evaluate(net, test_set, config_name=tag)
            results.append(ConfigResult(name=name, report=report, param_count=net.param_count, final_loss=history.final_loss))
        return results

    def ablation(self, train_set: Dataset, test_set: Dataset) -> list[ConfigResult]:
        """Time-only, frequency-only and fused networks trained on the same data and seed."""
        cfg = self._cfg
        specs = {
            "time-only": cfg.network_spec(branches=("time",)),
            "freq-only": cfg.network_spec(branches=("freq",)),
            "fused": cfg.network_spec(branches=("time", "freq")),
        }
        return self._compare(train_set, test_set, specs)

    def kernel_sweep(self, train_set: Dataset, test_set: Dataset, kernels: Optional[Sequence[int]] = None) -> list[ConfigResult]:
        """The fused network per kernel size, everything else fixed."""
        specs = {f"k={k}": self._cfg.network_spec(kernel=int(k)) for k in (kernels or self._cfg.evaluation.kernels)}
        return self._compare(train_set, test_set, specs)

    def _detector_windows(self, activity_cycle: Sequence[Activity | None], count: int, distance_m: float | None, occupied: bool, salt: int):
        cfg = self._cfg
        env = cfg.environment(cfg.environments.test[0])
        for index in range(count):
            activity = activity_cycle[index % len(activity_cycle)]
            scene = build_scene(activity, env, cfg.scene, cfg.seed + salt, distance_m=distance_m, sample_index=index, occupied=occupied)
            yield scene_window(scene, cfg), activity is not None

    def range_sweep(self, distances: Optional[Sequence[float]] = None, windows: Optional[int] = None) -> list[tuple[float, DetectorResult]]:
        """Detector TPR per horizontal distance, cycling through all seven activities."""
        distances = tuple(distances or self._cfg.evaluation.distances_m)
        count = windows or self._cfg.evaluation.windows_per_distance
        results = []
        for position, distance in enumerate(tqdm(distances, desc="range sweep", unit="distance", disable=not self._progress)):
            stream = self._detector_windows(list(Activity), count, distance, True, salt=1000 + position)
            result = eval_detector(stream, self._cfg.detector, require_both=False)
            self._logger.info(f"Range {distance:.2f} m: TPR {result.tpr:.4f} over {result.motion_windows} windows")
            results.append((float(distance), result))
        self._record([("", "tpr", f"{distance:.2f}m", result.tpr) for distance, result in results])
        return results

    def noise_far(self, windows: Optional[int] = None) -> DetectorResult:
        """False alarms over empty-room windows: static clutter and receiver noise only."""
        count = windows or self._cfg.evaluation.far_windows
        stream = tqdm(self._detector_windows([None], count, None, False, salt=2000), total=count, desc="noise FAR", unit="window", disable=not self._progress)
        result = eval_detector(stream, self._cfg.detector, require_both=False)
        self._logger.info(f"FAR {result.far_per_window:.4f} over {result.noise_windows} noise-only windows")
        self._record([("", "far", "", result.far_per_window)])
        return result
