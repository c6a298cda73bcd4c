# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/training.py
# ----------------------------------------------------------------------------------
# Purpose:
# Mini-batch SGD with momentum for the fusion network and a central finite-
# difference gradient check. Training is deterministic: batch order comes from
# `default_rng([seed, epoch])` and gradients are reduced in a fixed order.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from uwb_har.nn import ops
from uwb_har.nn.network import FusionNetwork
from uwb_har.nn.specs import NUM_CLASSES
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.logger import get_logger

__all__ = [
    "GradientCheck",
    "SGDMomentum",
    "TrainingConfig",
    "TrainingError",
    "TrainingHistory",
    "TrainingSet",
    "gradient_check",
    "train",
]


class TrainingError(UwbHarError):
    """Exception raised when training cannot continue."""


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 20
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or not 0 <= self.momentum < 1:
            raise TrainingError("learning_rate must be positive and momentum in [0, 1)", operation="TrainingConfig", kind="config")
        if self.batch_size < 1 or self.epochs < 1:
            raise TrainingError("batch_size and epochs must be >= 1", operation="TrainingConfig", kind="config")
        if self.dtype not in ("float32", "float64"):
            raise TrainingError(f"dtype must be float32 or float64, got {self.dtype}", operation="TrainingConfig", kind="config")


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Stacked (time, freq, label) triples: two (N, H, W) arrays and N class indices."""

    time: np.ndarray
    freq: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        if not (self.time.shape == self.freq.shape and self.time.shape[0] == self.labels.shape[0]):
            raise TrainingError(f"inconsistent shapes {self.time.shape}, {self.freq.shape}, {self.labels.shape}", operation="TrainingSet")
        if len(self) == 0:
            raise TrainingError("training set is empty", operation="TrainingSet")

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass
class TrainingHistory:
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1] if self.epoch_losses else float("nan")


@dataclass
class SGDMomentum:
    """v <- momentum * v - lr * g; w <- w + v."""

    learning_rate: float = 0.01
    momentum: float = 0.9
    _velocity: dict[str, np.ndarray] = field(init=False, default_factory=dict)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, value in params.items():
            velocity = self._velocity.get(name)
            if velocity is None:
                velocity = np.zeros_like(value)
            velocity = self.momentum * velocity - self.learning_rate * grads[name].astype(value.dtype, copy=False)
            self._velocity[name] = velocity
            value += velocity


def train(net: FusionNetwork, data: TrainingSet, cfg: TrainingConfig, seed: int = 0, progress: bool = True) -> TrainingHistory:
    """Train `net` in place and return the mean loss of every epoch."""
    logger = get_logger()
    optimizer = SGDMomentum(cfg.learning_rate, cfg.momentum)
    history = TrainingHistory()
    last_finite = float("nan")
    logger.info(f"Training on {len(data)} samples: {cfg.epochs} epochs, batch {cfg.batch_size}, lr {cfg.learning_rate}")

    for epoch in tqdm(range(cfg.epochs), desc="train", unit="epoch", disable=not progress):
        order = np.random.default_rng([int(seed), epoch]).permutation(len(data))
        losses = []
        for batch_index, start in enumerate(range(0, len(data), cfg.batch_size)):
            index = order[start : start + cfg.batch_size]
            loss, grads = net.loss_and_grads(data.time[index], data.freq[index], data.labels[index])
            if not np.isfinite(loss):
                logger.error(f"Non-finite loss at epoch {epoch} batch {batch_index}")
                raise TrainingError(
                    f"loss became {loss} at epoch {epoch}, batch {batch_index}; last finite loss {last_finite:.6f}",
                    operation="train",
                    kind="nan-loss",
                )
            last_finite = loss
            losses.append(loss * index.size)
            optimizer.step(net.parameters(), grads)
        history.epoch_losses.append(float(np.sum(losses) / len(data)))
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: loss {history.epoch_losses[-1]:.6f}")
    return history


@dataclass(frozen=True)
class GradientCheck:
    name: str
    relative_error: float
    abs_error: float
    checked: int
    skipped: int


def _perturbed_loss(net: FusionNetwork, time, freq, onehot: np.ndarray) -> tuple[float, np.ndarray]:
    probabilities = ops.softmax(net.logits(time, freq, train=True))
    return float(np.mean(ops.cross_entropy(probabilities, onehot))), net.relu_gates()


def gradient_check(net: FusionNetwork, time, freq, labels, eps: float = 1e-3, max_per_tensor: int | None = None, seed: int = 0) -> list[GradientCheck]:
    """Compare every weight gradient with central differences.

    Coordinates whose +-eps perturbation flips a ReLU gate are skipped and counted.
    `max_per_tensor` samples that many coordinates per tensor instead of all of them.
    """
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    _, analytic = net.loss_and_grads(time, freq, labels)
    analytic = {name: grad.copy() for name, grad in analytic.items()}
    gates = net.relu_gates()
    onehot = np.eye(NUM_CLASSES)[labels]
    rng = np.random.default_rng(seed)
    results = []

    for name, param in net.parameters().items():
        coordinates = list(np.ndindex(param.shape))
        if max_per_tensor is not None and len(coordinates) > max_per_tensor:
            coordinates = [coordinates[i] for i in sorted(rng.choice(len(coordinates), max_per_tensor, replace=False))]
        exact, numeric, skipped = [], [], 0
        for index in coordinates:
            original = param[index]
            param[index] = original + eps
            plus, gates_plus = _perturbed_loss(net, time, freq, onehot)
            param[index] = original - eps
            minus, gates_minus = _perturbed_loss(net, time, freq, onehot)
            param[index] = original
            if not (np.array_equal(gates_plus, gates) and np.array_equal(gates_minus, gates)):
                skipped += 1
                continue
            exact.append(analytic[name][index])
            numeric.append((plus - minus) / (2 * eps))
        exact_vec, numeric_vec = np.asarray(exact), np.asarray(numeric)
        denominator = max(np.linalg.norm(exact_vec) + np.linalg.norm(numeric_vec), 1e-12)
        difference = float(np.linalg.norm(exact_vec - numeric_vec)) if exact else 0.0
        results.append(GradientCheck(name=name, relative_error=difference / denominator, abs_error=difference, checked=len(exact), skipped=skipped))
    return results
