# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: tests/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module is used to run all tests in the tests directory. It also holds the
# independent reference implementations the tests compare against: nested-loop
# convolutions, a brute-force DFT and central finite differences.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import sys
from pathlib import Path

import numpy as np


def run_all_tests() -> None:
    """Run all tests in the tests directory using pytest."""
    try:
        import pytest

        tests_dir = Path(__file__).parent

        print(f"Running all tests in {tests_dir}...")

        exit_code = pytest.main([str(tests_dir), "-v"])
        sys.exit(exit_code)

    except ImportError:
        print("pytest is not installed. Please install it with: pip install pytest")
        sys.exit(1)


def _padded(x: np.ndarray, kernel: int, dilation: int) -> np.ndarray:
    pad = dilation * (kernel - 1) // 2
    return np.pad(x, ((pad, pad), (pad, pad), (0, 0)))


def _out_size(size: int, stride: int) -> int:
    return (size + stride - 1) // stride


def naive_conv(x: np.ndarray, w: np.ndarray, groups: int = 1, dilation: int = 1, stride: int = 1) -> np.ndarray:
    """Single image (H, W, C_in), kernel (k, k, C_in/G, C_out), same padding."""
    kernel, _, group_in, c_out = w.shape
    group_out = c_out // groups
    xp = _padded(x, kernel, dilation)
    span = dilation * (kernel - 1) + 1
    out_h, out_w = _out_size(x.shape[0], stride), _out_size(x.shape[1], stride)
    y = np.zeros((out_h, out_w, c_out))
    for i in range(out_h):
        for j in range(out_w):
            for o in range(c_out):
                g = o // group_out
                patch = xp[i * stride : i * stride + span : dilation, j * stride : j * stride + span : dilation, g * group_in : (g + 1) * group_in]
                total = 0.0
                for l in range(kernel):
                    for m in range(kernel):
                        for c in range(group_in):
                            total += patch[l, m, c] * w[l, m, c, o]
                y[i, j, o] = total
    return y


def naive_dconv(x: np.ndarray, w: np.ndarray, dilation: int = 1, stride: int = 1) -> np.ndarray:
    kernel, _, channels = w.shape
    xp = _padded(x, kernel, dilation)
    out_h, out_w = _out_size(x.shape[0], stride), _out_size(x.shape[1], stride)
    y = np.zeros((out_h, out_w, channels))
    for i in range(out_h):
        for j in range(out_w):
            for c in range(channels):
                total = 0.0
                for l in range(kernel):
                    for m in range(kernel):
                        total += xp[i * stride + l * dilation, j * stride + m * dilation, c] * w[l, m, c]
                y[i, j, c] = total
    return y


def naive_pconv(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    height, width, c_in = x.shape
    y = np.zeros((height, width, w.shape[1]))
    for i in range(height):
        for j in range(width):
            for o in range(w.shape[1]):
                y[i, j, o] = sum(x[i, j, c] * w[c, o] for c in range(c_in))
    return y


def brute_force_dft(x: np.ndarray) -> np.ndarray:
    """DFT along axis 0 by direct summation."""
    n = x.shape[0]
    out = np.zeros(x.shape, dtype=np.complex128)
    for f in range(n):
        for k in range(n):
            out[f] += x[k] * np.exp(-2j * np.pi * f * k / n)
    return out


def central_difference(func, x: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Numerical gradient of a scalar function of an array, one coordinate at a time."""
    x = x.astype(np.float64, copy=True)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + eps
        plus = func(x)
        x[index] = original - eps
        minus = func(x)
        x[index] = original
        grad[index] = (plus - minus) / (2 * eps)
    return grad
