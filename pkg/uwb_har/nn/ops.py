# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/ops.py
# ----------------------------------------------------------------------------------
# Purpose:
# Dense tensor kernels for the signal-adapted network: standard, point-wise,
# depth-wise, grouped and depth-wise separable convolutions (same padding,
# optional dilation and stride), activations, softmax / cross-entropy, channel
# split / concat, subsampling, adaptive average pooling and dense layers. Every
# forward kernel has a matching backward that returns input and weight gradients.
#
# Feature maps are laid out (..., H, W, C) so a leading batch axis is optional.
# Kernel layouts:
#   conv  (k, k, c_in, c_out)        pconv (c_in, c_out)
#   dconv (k, k, c)                  gconv (k, k, c_in / G, c_out)
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import numpy as np

from uwb_har.utils.errors import UwbHarError

__all__ = [
    "LOG_CLAMP",
    "NetworkError",
    "adaptive_avg_pool",
    "adaptive_avg_pool_backward",
    "channel_split",
    "concat",
    "conv",
    "conv_backward",
    "cross_entropy",
    "dconv",
    "dconv_backward",
    "dense",
    "dense_backward",
    "gconv",
    "gconv_backward",
    "output_size",
    "pconv",
    "pconv_backward",
    "relu",
    "relu_backward",
    "sconv",
    "softmax",
    "subsample",
    "subsample_backward",
]

LOG_CLAMP = 1e-12


class NetworkError(UwbHarError):
    """Exception raised for tensor shape and network layout errors."""


def _check(condition: bool, message: str, operation: str) -> None:
    if not condition:
        raise NetworkError(message, operation=operation)


def output_size(size: int, stride: int) -> int:
    return -(-size // stride)


def _padding(kernel: int, dilation: int) -> int:
    return dilation * (kernel - 1) // 2


def _pad(x: np.ndarray, pad: int) -> np.ndarray:
    if pad == 0:
        return x
    widths = [(0, 0)] * (x.ndim - 3) + [(pad, pad), (pad, pad), (0, 0)]
    return np.pad(x, widths)


def _taps(kernel: int, dilation: int, stride: int, out_h: int, out_w: int):
    """Yield (l, m, row_slice, col_slice) addressing each kernel tap in the padded input."""
    for l in range(kernel):
        rows = slice(l * dilation, l * dilation + stride * (out_h - 1) + 1, stride)
        for m in range(kernel):
            cols = slice(m * dilation, m * dilation + stride * (out_w - 1) + 1, stride)
            yield l, m, rows, cols


def _spatial_check(x: np.ndarray, kernel: int, dilation: int, stride: int, operation: str) -> None:
    _check(x.ndim >= 3, f"feature maps need shape (..., H, W, C), got {x.shape}", operation)
    _check(kernel >= 1 and kernel % 2 == 1, f"same padding needs an odd kernel, got {kernel}", operation)
    _check(dilation >= 1 and stride >= 1, "dilation and stride must be >= 1", operation)


def conv(x: np.ndarray, w: np.ndarray, dilation: int = 1, stride: int = 1) -> np.ndarray:
    """Standard convolution: every output channel sums over all input channels."""
    _check(w.ndim == 4 and w.shape[0] == w.shape[1], f"conv kernel must be (k, k, c_in, c_out), got {w.shape}", "conv")
    kernel, _, c_in, c_out = w.shape
    _spatial_check(x, kernel, dilation, stride, "conv")
    _check(x.shape[-1] == c_in, f"input has {x.shape[-1]} channels, kernel expects {c_in}", "conv")

    out_h, out_w = output_size(x.shape[-3], stride), output_size(x.shape[-2], stride)
    xp = _pad(x, _padding(kernel, dilation))
    y = np.zeros(x.shape[:-3] + (out_h, out_w, c_out), dtype=np.result_type(x, w))
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        y += xp[..., rows, cols, :] @ w[l, m]
    return y


def conv_backward(x: np.ndarray, w: np.ndarray, grad: np.ndarray, dilation: int = 1, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    kernel, _, c_in, c_out = w.shape
    pad = _padding(kernel, dilation)
    out_h, out_w = grad.shape[-3], grad.shape[-2]
    xp = _pad(x, pad)
    gxp = np.zeros_like(xp, dtype=np.result_type(x, w, grad))
    gw = np.zeros_like(w, dtype=np.result_type(x, w, grad))
    flat_grad = grad.reshape(-1, c_out)
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        gw[l, m] = xp[..., rows, cols, :].reshape(-1, c_in).T @ flat_grad
        gxp[..., rows, cols, :] += grad @ w[l, m].T
    return gxp[..., pad : pad + x.shape[-3], pad : pad + x.shape[-2], :], gw


def pconv(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Point-wise (1 x 1) convolution: per-pixel channel mixing."""
    _check(w.ndim == 2, f"pconv kernel must be (c_in, c_out), got {w.shape}", "pconv")
    _check(x.shape[-1] == w.shape[0], f"input has {x.shape[-1]} channels, kernel expects {w.shape[0]}", "pconv")
    return x @ w


def pconv_backward(x: np.ndarray, w: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gw = x.reshape(-1, w.shape[0]).T @ grad.reshape(-1, w.shape[1])
    return grad @ w.T, gw


def dconv(x: np.ndarray, w: np.ndarray, dilation: int = 1, stride: int = 1) -> np.ndarray:
    """Depth-wise convolution: channel c is filtered only by kernel slice c."""
    _check(w.ndim == 3 and w.shape[0] == w.shape[1], f"dconv kernel must be (k, k, c), got {w.shape}", "dconv")
    kernel = w.shape[0]
    _spatial_check(x, kernel, dilation, stride, "dconv")
    _check(x.shape[-1] == w.shape[2], f"input has {x.shape[-1]} channels, kernel expects {w.shape[2]}", "dconv")

    out_h, out_w = output_size(x.shape[-3], stride), output_size(x.shape[-2], stride)
    xp = _pad(x, _padding(kernel, dilation))
    y = np.zeros(x.shape[:-3] + (out_h, out_w, w.shape[2]), dtype=np.result_type(x, w))
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        y += xp[..., rows, cols, :] * w[l, m]
    return y


def dconv_backward(x: np.ndarray, w: np.ndarray, grad: np.ndarray, dilation: int = 1, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    kernel, _, channels = w.shape
    pad = _padding(kernel, dilation)
    out_h, out_w = grad.shape[-3], grad.shape[-2]
    xp = _pad(x, pad)
    gxp = np.zeros_like(xp, dtype=np.result_type(x, w, grad))
    gw = np.zeros_like(w, dtype=np.result_type(x, w, grad))
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        gw[l, m] = (xp[..., rows, cols, :] * grad).reshape(-1, channels).sum(axis=0)
        gxp[..., rows, cols, :] += grad * w[l, m]
    return gxp[..., pad : pad + x.shape[-3], pad : pad + x.shape[-2], :], gw


def _group_shapes(x: np.ndarray, w: np.ndarray, groups: int, operation: str) -> tuple[int, int, int]:
    _check(w.ndim == 4 and w.shape[0] == w.shape[1], f"gconv kernel must be (k, k, c_in/G, c_out), got {w.shape}", operation)
    c_in, c_out = x.shape[-1], w.shape[3]
    _check(groups >= 1 and c_in % groups == 0 and c_out % groups == 0, f"c_in={c_in} and c_out={c_out} must be divisible by G={groups}", operation)
    _check(w.shape[2] == c_in // groups, f"kernel expects {w.shape[2]} channels per group, input gives {c_in // groups}", operation)
    return c_in // groups, c_out // groups, c_out


def gconv(x: np.ndarray, w: np.ndarray, groups: int, dilation: int = 1, stride: int = 1) -> np.ndarray:
    """Grouped convolution: group g maps its c_in/G input channels to its c_out/G outputs."""
    kernel = w.shape[0]
    _spatial_check(x, kernel, dilation, stride, "gconv")
    group_in, group_out, c_out = _group_shapes(x, w, groups, "gconv")

    out_h, out_w = output_size(x.shape[-3], stride), output_size(x.shape[-2], stride)
    xp = _pad(x, _padding(kernel, dilation))
    y = np.zeros(x.shape[:-3] + (out_h, out_w, groups, group_out), dtype=np.result_type(x, w))
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        window = xp[..., rows, cols, :].reshape(x.shape[:-3] + (out_h, out_w, groups, group_in))
        y += np.einsum("...gc,cgo->...go", window, w[l, m].reshape(group_in, groups, group_out))
    return y.reshape(x.shape[:-3] + (out_h, out_w, c_out))


def gconv_backward(x: np.ndarray, w: np.ndarray, grad: np.ndarray, groups: int, dilation: int = 1, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    kernel = w.shape[0]
    group_in, group_out, c_out = _group_shapes(x, w, groups, "gconv_backward")
    pad = _padding(kernel, dilation)
    out_h, out_w = grad.shape[-3], grad.shape[-2]
    xp = _pad(x, pad)
    gxp = np.zeros_like(xp, dtype=np.result_type(x, w, grad))
    gw = np.zeros_like(w, dtype=np.result_type(x, w, grad))
    lead = x.shape[:-3] + (out_h, out_w)
    grouped_grad = grad.reshape(lead + (groups, group_out))
    for l, m, rows, cols in _taps(kernel, dilation, stride, out_h, out_w):
        window = xp[..., rows, cols, :].reshape(lead + (groups, group_in))
        gw[l, m] = np.einsum("...gc,...go->cgo", window, grouped_grad).reshape(group_in, c_out)
        tap = w[l, m].reshape(group_in, groups, group_out)
        gxp[..., rows, cols, :] += np.einsum("...go,cgo->...gc", grouped_grad, tap).reshape(lead + (groups * group_in,))
    return gxp[..., pad : pad + x.shape[-3], pad : pad + x.shape[-2], :], gw


def sconv(x: np.ndarray, w_d: np.ndarray, w_p: np.ndarray, dilation: int = 1, stride: int = 1) -> np.ndarray:
    """Depth-wise separable convolution: point-wise mixing of the depth-wise output."""
    return pconv(dconv(x, w_d, dilation=dilation, stride=stride), w_p)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return grad * (x > 0)


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def cross_entropy(p: np.ndarray, y_onehot: np.ndarray) -> np.ndarray | float:
    """-sum(y log p) over the class axis; p is clamped at 1e-12 before the log."""
    _check(p.shape == y_onehot.shape, f"probabilities {p.shape} and labels {y_onehot.shape} differ", "cross_entropy")
    loss = -np.sum(y_onehot * np.log(np.maximum(p, LOG_CLAMP)), axis=-1)
    return float(loss) if np.ndim(loss) == 0 else loss


def channel_split(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    channels = x.shape[-1]
    _check(channels % 2 == 0, f"channel split needs an even channel count, got {channels}", "channel_split")
    return x[..., : channels // 2], x[..., channels // 2 :]


def concat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check(a.shape[:-1] == b.shape[:-1], f"cannot concatenate {a.shape} and {b.shape}", "concat")
    return np.concatenate([a, b], axis=-1)


def subsample(x: np.ndarray, stride: int) -> np.ndarray:
    """Keep every stride-th row and column, aligned with a strided same-padded conv."""
    return x[..., ::stride, ::stride, :]


def subsample_backward(x_shape: tuple[int, ...], grad: np.ndarray, stride: int) -> np.ndarray:
    gx = np.zeros(x_shape, dtype=grad.dtype)
    gx[..., ::stride, ::stride, :] = grad
    return gx


def _pool_edges(size: int, cells: int) -> list[tuple[int, int]]:
    return [((i * size) // cells, -(-((i + 1) * size) // cells)) for i in range(cells)]


def adaptive_avg_pool(x: np.ndarray, grid: tuple[int, int]) -> np.ndarray:
    """Average-pool the spatial axes onto a fixed grid of (possibly overlapping) cells."""
    rows, cols = grid
    _check(1 <= rows <= x.shape[-3] and 1 <= cols <= x.shape[-2], f"pool grid {grid} exceeds feature map {x.shape[-3:-1]}", "adaptive_avg_pool")
    out = np.empty(x.shape[:-3] + (rows, cols, x.shape[-1]), dtype=x.dtype)
    for i, (r0, r1) in enumerate(_pool_edges(x.shape[-3], rows)):
        for j, (c0, c1) in enumerate(_pool_edges(x.shape[-2], cols)):
            out[..., i, j, :] = x[..., r0:r1, c0:c1, :].mean(axis=(-3, -2))
    return out


def adaptive_avg_pool_backward(x_shape: tuple[int, ...], grad: np.ndarray) -> np.ndarray:
    rows, cols = grad.shape[-3], grad.shape[-2]
    gx = np.zeros(x_shape, dtype=grad.dtype)
    for i, (r0, r1) in enumerate(_pool_edges(x_shape[-3], rows)):
        for j, (c0, c1) in enumerate(_pool_edges(x_shape[-2], cols)):
            share = grad[..., i, j, :] / ((r1 - r0) * (c1 - c0))
            gx[..., r0:r1, c0:c1, :] += share[..., None, None, :]
    return gx


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check(x.shape[-1] == w.shape[0], f"dense input has {x.shape[-1]} features, weights expect {w.shape[0]}", "dense")
    return x @ w + b


def dense_backward(x: np.ndarray, w: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    flat_x = x.reshape(-1, w.shape[0])
    flat_grad = grad.reshape(-1, w.shape[1])
    return grad @ w.T, flat_x.T @ flat_grad, flat_grad.sum(axis=0)
