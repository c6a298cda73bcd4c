# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/network.py
# ----------------------------------------------------------------------------------
# Purpose:
# The two-branch fusion network. The time-domain and Doppler spectrograms run
# through separate stacks of blocks (no shared weights); each branch is average-
# pooled onto a fixed grid, flattened, concatenated [time, freq] and classified by
# fully connected layers into 7 activity probabilities. Provides backpropagation,
# exact parameter / FLOP accounting and a per-layer table.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from uwb_har.nn import ops
from uwb_har.nn.layers import Block, DenseLayer, Layer, ReluLayer
from uwb_har.nn.specs import NUM_CLASSES, LayerSpec, NetworkSpec, OpKind

__all__ = [
    "FusionNetwork",
    "LayerRow",
    "backward",
    "flop_count",
    "forward",
    "param_count",
]


@dataclass(frozen=True)
class LayerRow:
    name: str
    kind: str
    kernel: int
    groups: int
    dilation: int
    params: int
    flops: int
    cumulative_params: int
    cumulative_flops: int


def _batch(x, expected: tuple[int, int], dtype, branch: str) -> tuple[np.ndarray, bool]:
    data = np.asarray(getattr(x, "data", x))
    single = data.ndim == 2
    if single:
        data = data[None]
    if data.ndim != 3 or data.shape[1:] != tuple(expected):
        raise ops.NetworkError(f"{branch} input must be {expected[0]}x{expected[1]}, got {data.shape[-2:]}", operation="forward")
    return data[..., None].astype(dtype, copy=False), single


@dataclass
class FusionNetwork:
    """Weights are He-normal initialized from `seed`; `dtype` is float32 for training, float64 for checks."""

    spec: NetworkSpec
    seed: int = 0
    dtype: str = "float64"
    _branches: dict[str, list[Block]] = field(init=False, default_factory=dict)
    _head: list[Layer] = field(init=False, default_factory=list)
    _feature_shapes: dict[str, tuple[int, ...]] = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        rng = np.random.default_rng(self.seed)
        dtype = np.dtype(self.dtype)
        for branch in self.spec.branches:
            self._branches[branch] = [Block(f"{branch}.block{index}", block, rng, dtype) for index, block in enumerate(self.spec.blocks(branch))]
        dense_index = 0
        for layer_spec in self.spec.head_specs():
            if layer_spec.op_kind == OpKind.FC:
                self._head.append(DenseLayer(f"head.fc{dense_index}", layer_spec, rng, dtype))
                dense_index += 1
            else:
                self._head.append(ReluLayer(f"head.relu{dense_index - 1}", layer_spec))

    @property
    def branches(self) -> dict[str, list[Block]]:
        return self._branches

    @property
    def head(self) -> list[Layer]:
        return self._head

    @property
    def layers(self) -> list[Layer]:
        """Every layer in declaration order: time blocks, frequency blocks, head."""
        ordered = [layer for blocks in self._branches.values() for block in blocks for layer in block.layers]
        return ordered + self._head

    def parameters(self) -> dict[str, np.ndarray]:
        return {f"{layer.name}.{key}": value for layer in self.layers for key, value in layer.params.items()}

    def gradients(self) -> dict[str, np.ndarray]:
        return {f"{layer.name}.{key}": layer.grads[key] for layer in self.layers for key in layer.params}

    def flat_weights(self) -> np.ndarray:
        return np.concatenate([value.ravel() for value in self.parameters().values()])

    def load_parameters(self, values: dict[str, np.ndarray]) -> None:
        current = self.parameters()
        if set(values) != set(current):
            missing, extra = sorted(set(current) - set(values)), sorted(set(values) - set(current))
            raise ops.NetworkError(f"parameter names differ: missing={missing} unexpected={extra}", operation="load_parameters")
        for layer in self.layers:
            for key, value in layer.params.items():
                incoming = np.asarray(values[f"{layer.name}.{key}"])
                if incoming.shape != value.shape:
                    raise ops.NetworkError(f"{layer.name}.{key}: expected shape {value.shape}, got {incoming.shape}", operation="load_parameters")
                layer.params[key] = incoming.astype(value.dtype)

    def relu_gates(self) -> np.ndarray:
        """Signs of every cached ReLU pre-activation from the last training forward pass."""
        gates = [layer.pre_activation.ravel() > 0 for layer in self.layers if isinstance(layer, ReluLayer) and layer.pre_activation is not None]
        return np.concatenate(gates) if gates else np.zeros(0, dtype=bool)

    def _inputs(self, time, freq) -> tuple[dict[str, np.ndarray], bool]:
        provided = {"time": time, "freq": freq}
        inputs, single = {}, False
        for branch in self.spec.branches:
            if provided[branch] is None:
                raise ops.NetworkError(f"the {branch} branch needs an input", operation="forward")
            inputs[branch], single = _batch(provided[branch], self.spec.input_shape, self.dtype, branch)
        if len({value.shape[0] for value in inputs.values()}) != 1:
            raise ops.NetworkError("time and frequency batches differ in size", operation="forward")
        return inputs, single

    def branch_features(self, time=None, freq=None, train: bool = False) -> dict[str, np.ndarray]:
        """Pooled, flattened feature vector of every active branch, shape (N, features)."""
        inputs, _ = self._inputs(time, freq)
        features = {}
        for branch, blocks in self._branches.items():
            x = inputs[branch]
            for block in blocks:
                x = block.forward(x, train)
            if train:
                self._feature_shapes[branch] = x.shape
            features[branch] = ops.adaptive_avg_pool(x, self.spec.pool_grid).reshape(x.shape[0], -1)
        return features

    def logits(self, time=None, freq=None, train: bool = False) -> np.ndarray:
        hidden = np.concatenate(list(self.branch_features(time, freq, train).values()), axis=-1)
        for layer in self._head:
            hidden = layer.forward(hidden, train)
        return hidden

    def forward(self, time=None, freq=None) -> np.ndarray:
        """Class probabilities, shape (7,) for one window or (N, 7) for a batch."""
        _, single = self._inputs(time, freq)
        probabilities = ops.softmax(self.logits(time, freq))
        return probabilities[0] if single else probabilities

    def predict(self, time=None, freq=None, workers: int = 1, chunk: int = 64) -> np.ndarray:
        """Batched probabilities, chunks evaluated concurrently and reassembled in order."""
        inputs, _ = self._inputs(time, freq)
        total = next(iter(inputs.values())).shape[0]
        starts = list(range(0, total, chunk))

        def run(start: int) -> np.ndarray:
            part = {name: value[start : start + chunk, ..., 0] for name, value in inputs.items()}
            return ops.softmax(self.logits(part.get("time"), part.get("freq")))

        if workers <= 1 or len(starts) == 1:
            parts = [run(start) for start in starts]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(run, starts))
        return np.concatenate(parts, axis=0) if parts else np.zeros((0, NUM_CLASSES))

    def backward(self, grad_logits: np.ndarray) -> dict[str, np.ndarray]:
        grad = grad_logits
        for layer in reversed(self._head):
            grad = layer.backward(grad)
        offset = 0
        for branch, blocks in self._branches.items():
            width = self.spec.branch_features(branch)
            shape = self._feature_shapes[branch]
            pooled = grad[:, offset : offset + width].reshape(shape[0], *self.spec.pool_grid, shape[-1])
            offset += width
            g = ops.adaptive_avg_pool_backward(shape, pooled)
            for block in reversed(blocks):
                g = block.backward(g)
        return self.gradients()

    def loss_and_grads(self, time, freq, labels: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
        """Mean cross-entropy over the batch and the gradient of every weight."""
        labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
        probabilities = ops.softmax(self.logits(time, freq, train=True))
        if probabilities.shape[0] != labels.size:
            raise ops.NetworkError(f"{labels.size} labels for a batch of {probabilities.shape[0]}", operation="loss_and_grads")
        onehot = np.eye(NUM_CLASSES, dtype=probabilities.dtype)[labels]
        loss = float(np.mean(ops.cross_entropy(probabilities, onehot)))
        grads = self.backward((probabilities - onehot) / labels.size)
        return loss, grads

    @property
    def param_count(self) -> int:
        return int(sum(layer.param_count for layer in self.layers))

    def layer_table(self, input_shape: tuple[int, int] | None = None) -> list[LayerRow]:
        rows: list[LayerRow] = []
        totals = [0, 0]

        def add(name: str, spec, height: int, width: int) -> None:
            params, flops = spec.param_count, spec.flop_count(height, width)
            totals[0] += params
            totals[1] += flops
            rows.append(LayerRow(name, spec.op_kind.value, spec.kernel, spec.groups, spec.dilation, params, flops, totals[0], totals[1]))

        base_h, base_w = input_shape or self.spec.input_shape
        for branch, blocks in self._branches.items():
            height, width = base_h, base_w
            for block in blocks:
                specs = block.spec.layer_specs()
                out_h, out_w = block.spec.output_hw(height, width)
                add(f"{block.name}.reduce", specs["reduce"], height, width)
                add(f"{block.name}.split", specs["split"], height, width)
                add(f"{block.name}.transform", specs["transform"], height, width)
                add(f"{block.name}.passthrough", specs["passthrough"], height, width)
                add(f"{block.name}.concat", specs["concat"], out_h, out_w)
                add(f"{block.name}.merge", specs["merge"], out_h, out_w)
                add(f"{block.name}.relu", specs["relu"], out_h, out_w)
                height, width = out_h, out_w
            channels = blocks[-1].spec.channels_out
            add(f"{branch}.pool", LayerSpec(OpKind.POOL, channels, channels), height, width)
        for layer in self._head:
            add(layer.name, layer.spec, 1, 1)
        return rows

    def flop_count(self, input_shape: tuple[int, int] | None = None) -> int:
        table = self.layer_table(input_shape)
        return table[-1].cumulative_flops if table else 0


def forward(net: FusionNetwork, time, freq) -> np.ndarray:
    return net.forward(time, freq)


def backward(net: FusionNetwork, time, freq, labels) -> tuple[float, dict[str, np.ndarray]]:
    return net.loss_and_grads(time, freq, labels)


def param_count(net: FusionNetwork) -> int:
    return net.param_count


def flop_count(net: FusionNetwork, input_shape: tuple[int, int] | None = None) -> int:
    return net.flop_count(input_shape)
