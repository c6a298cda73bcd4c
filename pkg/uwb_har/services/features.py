# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/services/features.py
# ----------------------------------------------------------------------------------
# Purpose:
# Converts a preprocessed frame-matrix window into the two network inputs: the
# time-domain spectrogram (delay profile magnitudes over slow-time) and the
# Doppler spectrogram (log-compressed slow-time DFT per fast-time bin).
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import fft

from uwb_har.services.channel import FrameMatrix
from uwb_har.utils.errors import UwbHarError

__all__ = [
    "FAST_TIME_BINS",
    "FeatureError",
    "Normalization",
    "Spectrogram",
    "SpectrogramKind",
    "WINDOW_FRAMES",
    "doppler_spectrogram",
    "normalize",
    "slow_time_dft",
    "time_spectrogram",
]

WINDOW_FRAMES = 400
FAST_TIME_BINS = 60


class FeatureError(UwbHarError):
    """Exception raised for spectrogram construction."""


class SpectrogramKind(Enum):
    TIME_DOMAIN = 1
    DOPPLER_DOMAIN = 2


class Normalization(Enum):
    NONE = 0
    ZSCORE = 1


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Real-valued single-channel image: rows are slow-time frames (time) or DFT bins (Doppler)."""

    data: np.ndarray
    kind: SpectrogramKind
    normalization: Normalization = Normalization.NONE

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise FeatureError(f"spectrogram must be 2-D, got shape {self.data.shape}", operation="Spectrogram")
        if np.iscomplexobj(self.data) or not np.all(np.isfinite(self.data)):
            raise FeatureError("spectrogram entries must be finite reals", operation="Spectrogram")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def check_shape(self, expected: tuple[int, int], operation: str = "Spectrogram") -> "Spectrogram":
        """Raise FeatureError unless the image is `expected` (frames x bins)."""
        if self.shape != tuple(expected):
            raise FeatureError(
                f"expected a {expected[0]}x{expected[1]} {self.kind.name.lower()} spectrogram, got {self.shape[0]}x{self.shape[1]}",
                operation=operation,
            )
        return self


def _check_window(frames: FrameMatrix, window_frames: int, operation: str) -> None:
    if frames.data.shape != (window_frames, frames.radio.fast_time_bins):
        raise FeatureError(
            f"expected a {window_frames}x{frames.radio.fast_time_bins} window, got {frames.data.shape[0]}x{frames.data.shape[1]}",
            operation=operation,
        )


def time_spectrogram(frames: FrameMatrix, window_frames: int = WINDOW_FRAMES) -> Spectrogram:
    _check_window(frames, window_frames, "time_spectrogram")
    return Spectrogram(data=np.abs(frames.data), kind=SpectrogramKind.TIME_DOMAIN)


def slow_time_dft(frames: FrameMatrix, window_frames: int = WINDOW_FRAMES) -> np.ndarray:
    """Complex DFT along slow-time for every fast-time bin; zero frequency first, no shift."""
    _check_window(frames, window_frames, "slow_time_dft")
    return fft.fft(frames.data, axis=0)


def doppler_spectrogram(frames: FrameMatrix, window_frames: int = WINDOW_FRAMES) -> Spectrogram:
    return Spectrogram(data=np.log1p(np.abs(slow_time_dft(frames, window_frames))), kind=SpectrogramKind.DOPPLER_DOMAIN)


def normalize(spectrogram: Spectrogram) -> Spectrogram:
    """Z-score over the whole matrix; a constant matrix maps to zeros."""
    data = spectrogram.data
    std = data.std()
    if data.size == 0 or data.max() == data.min() or std == 0:
        normalized = np.zeros_like(data)
    else:
        normalized = (data - data.mean()) / std
    return replace(spectrogram, data=normalized, normalization=Normalization.ZSCORE)
