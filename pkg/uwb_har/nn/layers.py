# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/layers.py
# ----------------------------------------------------------------------------------
# Purpose:
# Stateful layers wrapping the kernels in ops.py. A layer owns its parameters and
# their gradients and, when run with `train=True`, caches the activations needed
# by `backward`. Inference calls (`train=False`) leave the layer untouched, so a
# trained network can be shared between worker threads.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import numpy as np

from uwb_har.nn import ops
from uwb_har.nn.specs import BlockSpec, LayerSpec, OpKind

__all__ = [
    "Block",
    "ConvLayer",
    "DenseLayer",
    "DepthwiseLayer",
    "Layer",
    "PointwiseLayer",
    "ReluLayer",
    "SeparableLayer",
    "block_forward",
]


def _he_normal(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class Layer:
    """Base class: ordered parameter and gradient dictionaries plus an activation cache."""

    def __init__(self, name: str, spec: LayerSpec):
        self.name = name
        self.spec = spec
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self._cache: np.ndarray | None = None

    @property
    def param_count(self) -> int:
        return int(sum(value.size for value in self.params.values()))

    def _cached(self) -> np.ndarray:
        if self._cache is None:
            raise ops.NetworkError(f"{self.name}: backward called without a training forward pass", operation="backward")
        return self._cache

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ConvLayer(Layer):
    """Standard (G = 1) or grouped convolution."""

    def __init__(self, name: str, spec: LayerSpec, rng: np.random.Generator, dtype=np.float64):
        super().__init__(name, spec)
        k, groups = spec.kernel, spec.groups
        shape = (k, k, spec.in_channels // groups, spec.out_channels)
        self.params["kernel"] = _he_normal(rng, shape, k * k * spec.in_channels // groups, dtype)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._cache = x
        if self.spec.op_kind == OpKind.CONV:
            return ops.conv(x, self.params["kernel"], dilation=self.spec.dilation, stride=self.spec.stride)
        return ops.gconv(x, self.params["kernel"], self.spec.groups, dilation=self.spec.dilation, stride=self.spec.stride)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._cached()
        if self.spec.op_kind == OpKind.CONV:
            gx, gw = ops.conv_backward(x, self.params["kernel"], grad, dilation=self.spec.dilation, stride=self.spec.stride)
        else:
            gx, gw = ops.gconv_backward(x, self.params["kernel"], grad, self.spec.groups, dilation=self.spec.dilation, stride=self.spec.stride)
        self.grads["kernel"] = gw
        return gx


class PointwiseLayer(Layer):
    def __init__(self, name: str, spec: LayerSpec, rng: np.random.Generator, dtype=np.float64):
        super().__init__(name, spec)
        self.params["kernel"] = _he_normal(rng, (spec.in_channels, spec.out_channels), spec.in_channels, dtype)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._cache = x
        return ops.pconv(x, self.params["kernel"])

    def backward(self, grad: np.ndarray) -> np.ndarray:
        gx, self.grads["kernel"] = ops.pconv_backward(self._cached(), self.params["kernel"], grad)
        return gx


class DepthwiseLayer(Layer):
    def __init__(self, name: str, spec: LayerSpec, rng: np.random.Generator, dtype=np.float64):
        super().__init__(name, spec)
        k = spec.kernel
        self.params["kernel"] = _he_normal(rng, (k, k, spec.in_channels), k * k, dtype)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._cache = x
        return ops.dconv(x, self.params["kernel"], dilation=self.spec.dilation, stride=self.spec.stride)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        gx, self.grads["kernel"] = ops.dconv_backward(self._cached(), self.params["kernel"], grad, dilation=self.spec.dilation, stride=self.spec.stride)
        return gx


class SeparableLayer(Layer):
    """Depth-wise (dilated, strided) convolution followed by point-wise mixing."""

    def __init__(self, name: str, spec: LayerSpec, rng: np.random.Generator, dtype=np.float64):
        super().__init__(name, spec)
        k, c_in, c_out = spec.kernel, spec.in_channels, spec.out_channels
        self.params["depthwise"] = _he_normal(rng, (k, k, c_in), k * k, dtype)
        self.params["pointwise"] = _he_normal(rng, (c_in, c_out), c_in, dtype)
        self._depthwise_out: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        hidden = ops.dconv(x, self.params["depthwise"], dilation=self.spec.dilation, stride=self.spec.stride)
        if train:
            self._cache = x
            self._depthwise_out = hidden
        return ops.pconv(hidden, self.params["pointwise"])

    def backward(self, grad: np.ndarray) -> np.ndarray:
        x = self._cached()
        g_hidden, self.grads["pointwise"] = ops.pconv_backward(self._depthwise_out, self.params["pointwise"], grad)
        gx, self.grads["depthwise"] = ops.dconv_backward(x, self.params["depthwise"], g_hidden, dilation=self.spec.dilation, stride=self.spec.stride)
        return gx


class DenseLayer(Layer):
    def __init__(self, name: str, spec: LayerSpec, rng: np.random.Generator, dtype=np.float64):
        super().__init__(name, spec)
        self.params["weight"] = _he_normal(rng, (spec.in_channels, spec.out_channels), spec.in_channels, dtype)
        self.params["bias"] = np.zeros(spec.out_channels, dtype=dtype)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._cache = x
        return ops.dense(x, self.params["weight"], self.params["bias"])

    def backward(self, grad: np.ndarray) -> np.ndarray:
        gx, self.grads["weight"], self.grads["bias"] = ops.dense_backward(self._cached(), self.params["weight"], grad)
        return gx


class ReluLayer(Layer):
    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        if train:
            self._cache = x
        return ops.relu(x)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return ops.relu_backward(self._cached(), grad)

    @property
    def pre_activation(self) -> np.ndarray | None:
        return self._cache


def block_forward(x: np.ndarray, spec: BlockSpec, weights: dict[str, np.ndarray]) -> np.ndarray:
    """Stateless block evaluation from explicit weights: reduce, depthwise, pointwise, merge."""
    reduced = ops.gconv(x, weights["reduce"], spec.reduce_groups)
    first, second = ops.channel_split(reduced)
    transformed = ops.sconv(first, weights["depthwise"], weights["pointwise"], dilation=spec.dilation, stride=spec.stride)
    merged = ops.pconv(ops.concat(transformed, ops.subsample(second, spec.stride)), weights["merge"])
    return ops.relu(merged)


class Block:
    """Reduce-split-transform-merge block; the first half of the split feeds the separable conv."""

    def __init__(self, name: str, spec: BlockSpec, rng: np.random.Generator, dtype=np.float64):
        self.name = name
        self.spec = spec
        specs = spec.layer_specs()
        self.reduce = ConvLayer(f"{name}.reduce", specs["reduce"], rng, dtype)
        self.transform = SeparableLayer(f"{name}.transform", specs["transform"], rng, dtype)
        self.merge = PointwiseLayer(f"{name}.merge", specs["merge"], rng, dtype)
        self.relu = ReluLayer(f"{name}.relu", specs["relu"])
        self._second_shape: tuple[int, ...] | None = None

    @property
    def layers(self) -> list[Layer]:
        return [self.reduce, self.transform, self.merge, self.relu]

    @property
    def weights(self) -> dict[str, np.ndarray]:
        return {
            "reduce": self.reduce.params["kernel"],
            "depthwise": self.transform.params["depthwise"],
            "pointwise": self.transform.params["pointwise"],
            "merge": self.merge.params["kernel"],
        }

    @property
    def param_count(self) -> int:
        return sum(layer.param_count for layer in self.layers)

    def forward(self, x: np.ndarray, train: bool = False) -> np.ndarray:
        first, second = ops.channel_split(self.reduce.forward(x, train))
        if train:
            self._second_shape = second.shape
        transformed = self.transform.forward(first, train)
        merged = self.merge.forward(ops.concat(transformed, ops.subsample(second, self.spec.stride)), train)
        return self.relu.forward(merged, train)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        g_concat = self.merge.backward(self.relu.backward(grad))
        half = self.spec.half_channels
        g_first = self.transform.backward(g_concat[..., :half])
        g_second = ops.subsample_backward(self._second_shape, g_concat[..., half:], self.spec.stride)
        return self.reduce.backward(ops.concat(g_first, g_second))
