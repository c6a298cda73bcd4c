# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/services/dsp.py
# ----------------------------------------------------------------------------------
# Purpose:
# Three-stage preprocessing of frame matrices: phase-noise reduction against a
# static reference reflector, SNR enhancement with a cascading filter (26-tap
# Hamming FIR low-pass followed by a 5-point smoother) and motion detection
# (background subtraction, per-bin standard deviation, peak-average threshold).
# All filters run along slow-time, independently for every fast-time bin.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import signal as sps

from uwb_har.services.channel import FrameMatrix
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.logger import get_logger

__all__ = [
    "BACKGROUND_FORGETTING",
    "DSPError",
    "DetectorConfig",
    "FIR_CUTOFF_HZ",
    "FIR_SETTLE_FRAMES",
    "FIR_TAPS",
    "MotionReport",
    "SMOOTH_POINTS",
    "background_subtract",
    "correct_phase",
    "design_lowpass",
    "detect_motion",
    "detect_stream",
    "detect_window",
    "fast_time_std",
    "fir_lowpass",
    "preprocess",
    "smooth",
]

FIR_TAPS = 26
FIR_CUTOFF_HZ = 80.0
SLOW_TIME_RATE_HZ = 400.0
SMOOTH_POINTS = 5
BACKGROUND_FORGETTING = 0.95
# Frames at each end of a record touched by the FIR's zero padding
FIR_SETTLE_FRAMES = FIR_TAPS // 2


class DSPError(UwbHarError):
    """Exception raised for preprocessing and detection operations."""


@dataclass(frozen=True)
class DetectorConfig:
    """Parameters of the standard-deviation / peak-average motion detector."""

    coef: float = 1.5
    guard_cells: int = 3
    min_cells_over: int = 1
    window_frames: int = 400

    def __post_init__(self) -> None:
        if not self.coef > 1:
            raise DSPError(f"coef must exceed 1, got {self.coef}", operation="DetectorConfig", kind="config")
        if self.guard_cells < 0 or self.min_cells_over < 1:
            raise DSPError("guard_cells must be >= 0 and min_cells_over >= 1", operation="DetectorConfig", kind="config")
        if self.window_frames < 2:
            raise DSPError(f"window_frames must be at least 2, got {self.window_frames}", operation="DetectorConfig", kind="config")


@dataclass(frozen=True, eq=False)
class MotionReport:
    """Outcome of peak-average detection over one SD vector."""

    detected: bool
    peak_bin: int
    sd_vector: np.ndarray
    threshold: float
    noise_floor: float

    @property
    def peak_sd(self) -> float:
        return float(self.sd_vector[self.peak_bin])

    def as_line(self, window_start_frame: int) -> str:
        """Render as `window_start_frame, detected, peak_bin, peak_sd, threshold`."""
        return f"{window_start_frame}, {str(self.detected).lower()}, {self.peak_bin}, {self.peak_sd:.6e}, {self.threshold:.6e}"


def _frames_required(frames: FrameMatrix, minimum: int, operation: str) -> None:
    if frames.n_frames < minimum:
        raise DSPError(f"need at least {minimum} frames, got {frames.n_frames}", operation=operation)


def correct_phase(frames: FrameMatrix) -> FrameMatrix:
    """Remove per-frame phase jitter using the strongest fast-time bin as reference."""
    _frames_required(frames, 2, "correct_phase")
    data = frames.data
    mean_amplitude = np.abs(data).mean(axis=0)
    reference = int(np.argmax(mean_amplitude))
    if mean_amplitude[reference] == 0:
        raise DSPError("no reference reflector: input is all zeros", operation="correct_phase", kind="no-reference")

    mean_phase = np.angle(data[:, reference].mean())
    frame_phase = np.angle(data[:, reference])
    rotation = np.exp(-1j * (frame_phase - mean_phase))
    return frames.with_data(data * rotation[:, None])


def design_lowpass(sample_rate_hz: float = SLOW_TIME_RATE_HZ, taps: int = FIR_TAPS, cutoff_hz: float = FIR_CUTOFF_HZ) -> np.ndarray:
    """Linear-phase Hamming-windowed sinc low-pass, DC gain normalized to 1."""
    return sps.firwin(taps, cutoff_hz, window="hamming", fs=sample_rate_hz)


def fir_lowpass(samples: np.ndarray, sample_rate_hz: float = SLOW_TIME_RATE_HZ) -> np.ndarray:
    """Filter along axis 0 (slow-time); output has the input's length, edges zero-padded."""
    samples = np.asarray(samples)
    if samples.shape[0] < FIR_TAPS:
        raise DSPError(f"signal of length {samples.shape[0]} is shorter than {FIR_TAPS} taps", operation="fir_lowpass")
    taps = design_lowpass(sample_rate_hz)
    kernel = taps.reshape((-1,) + (1,) * (samples.ndim - 1))
    return sps.convolve(samples, kernel, mode="same", method="direct")


def smooth(samples: np.ndarray) -> np.ndarray:
    """Centered 5-point moving average along axis 0; edge windows shrink to the available samples."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    if n < SMOOTH_POINTS:
        raise DSPError(f"signal of length {n} is shorter than the {SMOOTH_POINTS}-point window", operation="smooth")
    half = SMOOTH_POINTS // 2
    padded = np.concatenate([np.zeros((1,) + samples.shape[1:], dtype=samples.dtype), samples], axis=0)
    cumulative = np.cumsum(padded, axis=0)
    index = np.arange(n)
    lo = np.maximum(index - half, 0)
    hi = np.minimum(index + half + 1, n)
    counts = (hi - lo).reshape((-1,) + (1,) * (samples.ndim - 1))
    return (cumulative[hi] - cumulative[lo]) / counts


def background_subtract(frames: FrameMatrix, forgetting: float = BACKGROUND_FORGETTING) -> FrameMatrix:
    """Subtract an exponentially-forgetting slow-time mean per bin, seeded with the first frame."""
    _frames_required(frames, 2, "background_subtract")
    data = frames.data
    first = data[0]
    background, _ = sps.lfilter([1.0 - forgetting], [1.0, -forgetting], data, axis=0, zi=(forgetting * first)[None, :])
    previous = np.vstack([first[None, :], background[:-1]])
    return frames.with_data(data - previous)


def preprocess(frames: FrameMatrix) -> FrameMatrix:
    """Phase correction, cascading filter and background subtraction, in that order.

    The record is extended by repeating its first and last frames before the FIR,
    and the extension is cut afterwards: a strong static return then stays flat up
    to the last frame instead of ramping into the filter's zero padding.
    """
    corrected = correct_phase(frames)
    margin = [(FIR_SETTLE_FRAMES, FIR_SETTLE_FRAMES), (0, 0)]
    extended = np.pad(corrected.data, margin, mode="edge")
    lowpassed = fir_lowpass(extended, sample_rate_hz=1.0 / frames.frame_period_s)[FIR_SETTLE_FRAMES:-FIR_SETTLE_FRAMES]
    filtered = smooth(lowpassed)
    return background_subtract(corrected.with_data(filtered))


def fast_time_std(frames: FrameMatrix, cfg: DetectorConfig) -> np.ndarray:
    """Sample standard deviation (N - 1) of each bin's magnitude over the last N frames."""
    n = cfg.window_frames
    if n < 2:
        raise DSPError(f"window_frames must be at least 2, got {n}", operation="fast_time_std")
    if n > frames.n_frames:
        raise DSPError(f"window of {n} frames exceeds the {frames.n_frames} available", operation="fast_time_std")
    return np.std(np.abs(frames.data[-n:]), axis=0, ddof=1)


def detect_motion(sd: np.ndarray, cfg: DetectorConfig) -> MotionReport:
    """Compare the strongest cell against coef times the mean of the noise-floor cells."""
    sd = np.asarray(sd, dtype=np.float64)
    if sd.ndim != 1 or sd.size < 2 * cfg.guard_cells + 3:
        raise DSPError(f"SD vector of length {sd.size} is too short for guard_cells={cfg.guard_cells}", operation="detect_motion")

    peak = int(np.argmax(sd))
    floor_cells = np.ones(sd.size, dtype=bool)
    floor_cells[max(0, peak - cfg.guard_cells) : peak + cfg.guard_cells + 1] = False
    noise_floor = float(sd[floor_cells].mean())
    threshold = cfg.coef * noise_floor
    cells_over = int(np.count_nonzero(sd > threshold))
    detected = bool(sd[peak] > threshold and cells_over >= cfg.min_cells_over)
    return MotionReport(detected=detected, peak_bin=peak, sd_vector=sd, threshold=threshold, noise_floor=noise_floor)


def detect_window(frames: FrameMatrix, cfg: DetectorConfig) -> MotionReport:
    """Run the detector over the trailing window of a preprocessed frame matrix."""
    report = detect_motion(fast_time_std(frames, cfg), cfg)
    get_logger().debug(f"Motion detection: detected={report.detected} peak_bin={report.peak_bin} peak_sd={report.peak_sd:.3e}")
    return report


def detect_stream(frames: FrameMatrix, cfg: DetectorConfig, hop_frames: int | None = None) -> Iterator[tuple[int, MotionReport]]:
    """Yield (window_start_frame, report) for consecutive windows of a preprocessed scene.

    The last window always ends on the last frame, overlapping its predecessor
    when the hop does not divide the remainder.
    """
    hop = cfg.window_frames if hop_frames is None else hop_frames
    if hop < 1:
        raise DSPError("hop_frames must be positive", operation="detect_stream")
    if frames.n_frames < cfg.window_frames:
        raise DSPError(f"scene of {frames.n_frames} frames is shorter than one window", operation="detect_stream")
    last = frames.n_frames - cfg.window_frames
    starts = list(range(0, last + 1, hop))
    if starts[-1] != last:
        starts.append(last)
    for start in starts:
        yield start, detect_window(frames.window(start, cfg.window_frames), cfg)
