# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/services/channel.py
# ----------------------------------------------------------------------------------
# Purpose:
# Baseband UWB impulse-radio channel simulator. A scene is a list of discrete
# reflection paths (static clutter plus moving human scatterers); each slow-time
# frame samples the sum of delayed Gaussian pulses, each rotated by its carrier
# phase, at every fast-time ADC instant. Noise and per-frame phase jitter (STO) are
# drawn from a per-frame random stream so simulations are reproducible.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.logger import get_logger

__all__ = [
    "ChannelError",
    "FrameMatrix",
    "MotionProfile",
    "MotionSegment",
    "NoiseModel",
    "PathModel",
    "PathOverride",
    "RadioConfig",
    "SPEED_OF_LIGHT",
    "range_resolution",
    "simulate_activity",
    "synth_frame",
    "synth_pulse",
]

SPEED_OF_LIGHT = 2.998e8


class ChannelError(UwbHarError):
    """Exception raised for channel simulation operations."""


def _require(condition: bool, message: str, operation: str) -> None:
    if not condition:
        raise ChannelError(message, operation=operation)


def _unknown_keys(data: Mapping[str, Any], allowed: set[str], operation: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ChannelError(f"Unknown keys {unknown}", operation=operation, kind="config")


@dataclass(frozen=True)
class RadioConfig:
    """Pulse, carrier, sampling and geometry parameters of the simulated transceiver."""

    carrier_freq_hz: float = 7.3e9
    bandwidth_hz: float = 1.4e9
    pulse_amplitude: float = 1.0
    pulse_duration_s: float | None = None
    pulse_repetition_hz: float = 400.0
    adc_interval_s: float | None = None
    fast_time_bins: int = 60
    propagation_speed_mps: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        _require(self.bandwidth_hz > 0, "bandwidth_hz must be positive", "RadioConfig")
        # One ADC step per range resolution cell: bin spacing equals c/(2B).
        if self.adc_interval_s is None:
            object.__setattr__(self, "adc_interval_s", 1.0 / self.bandwidth_hz)
        if self.pulse_duration_s is None:
            object.__setattr__(self, "pulse_duration_s", 6.0 * self.sigma_p)

        for name in ("carrier_freq_hz", "pulse_amplitude", "pulse_duration_s", "pulse_repetition_hz", "adc_interval_s", "propagation_speed_mps"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 0, f"{name} must be positive and finite, got {value}", "RadioConfig")
        _require(int(self.fast_time_bins) == self.fast_time_bins and self.fast_time_bins > 0, "fast_time_bins must be a positive integer", "RadioConfig")
        _require(
            self.fast_time_bins * self.adc_interval_s <= 1.0 / self.pulse_repetition_hz,
            "fast-time window exceeds the frame period",
            "RadioConfig",
        )
        _require(math.isfinite(self.sigma_p) and self.sigma_p > 0, "derived pulse width is not finite", "RadioConfig")

    @property
    def sigma_p(self) -> float:
        """Gaussian pulse standard deviation for the -10 dB bandwidth."""
        return 1.0 / (2.0 * math.pi * self.bandwidth_hz * math.sqrt(math.log10(math.e)))

    @property
    def frame_period_s(self) -> float:
        return 1.0 / self.pulse_repetition_hz

    @property
    def bin_spacing_m(self) -> float:
        """Range covered by one fast-time bin."""
        return self.propagation_speed_mps * self.adc_interval_s / 2.0

    def range_of_bin(self, bin_index: float) -> float:
        """Range whose pulse envelope peaks at the given fast-time bin."""
        return self.propagation_speed_mps * (bin_index * self.adc_interval_s - self.pulse_duration_s / 2.0) / 2.0

    def bin_of_range(self, range_m: float) -> float:
        """Fractional fast-time bin at which a reflector at range_m peaks."""
        return (2.0 * range_m / self.propagation_speed_mps + self.pulse_duration_s / 2.0) / self.adc_interval_s

    @property
    def max_range_m(self) -> float:
        return self.range_of_bin(self.fast_time_bins - 1)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RadioConfig":
        _unknown_keys(data, {f for f in cls.__dataclass_fields__}, "RadioConfig")
        return cls(**dict(data))


@dataclass(frozen=True)
class PathModel:
    """Reflection parameters of one propagation path."""

    attenuation: float
    range_m: float
    radial_speed_mps: float = 0.0
    micro_amplitude_m: float = 0.0
    micro_freq_hz: float = 0.0

    def __post_init__(self) -> None:
        _require(self.attenuation >= 0, "attenuation must be non-negative", "PathModel")
        _require(self.range_m > 0, "range_m must be positive", "PathModel")
        _require(self.micro_amplitude_m >= 0, "micro_amplitude_m must be non-negative", "PathModel")
        _require(self.micro_freq_hz >= 0, "micro_freq_hz must be non-negative", "PathModel")
        for name in ("attenuation", "range_m", "radial_speed_mps", "micro_amplitude_m", "micro_freq_hz"):
            _require(math.isfinite(getattr(self, name)), f"{name} must be finite", "PathModel")

    def delay(self, c: float = SPEED_OF_LIGHT) -> float:
        return 2.0 * self.range_m / c

    def doppler_delay(self, frame_index: int, frame_period_s: float, c: float = SPEED_OF_LIGHT) -> float:
        return 2.0 * self.radial_speed_mps * frame_index * frame_period_s / c

    def micro_delay(self, frame_index: int, frame_period_s: float, c: float = SPEED_OF_LIGHT) -> float:
        return 2.0 * self.micro_amplitude_m * (1.0 - math.cos(2.0 * math.pi * self.micro_freq_hz * frame_index * frame_period_s)) / c

    def static_phase(self, carrier_freq_hz: float, c: float = SPEED_OF_LIGHT) -> float:
        return 2.0 * math.pi * carrier_freq_hz * self.delay(c)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PathModel":
        _unknown_keys(data, {f for f in cls.__dataclass_fields__}, "PathModel")
        return cls(**{key: float(value) for key, value in data.items()})


@dataclass(frozen=True)
class NoiseModel:
    """Receiver noise and sampling-clock phase jitter."""

    awgn_variance: float = 0.0
    phase_jitter_std_rad: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        _require(self.awgn_variance >= 0, "awgn_variance must be non-negative", "NoiseModel")
        _require(self.phase_jitter_std_rad >= 0, "phase_jitter_std_rad must be non-negative", "NoiseModel")
        _require(int(self.seed) == self.seed and self.seed >= 0, "seed must be a non-negative integer", "NoiseModel")

    def frame_rng(self, frame_index: int) -> np.random.Generator:
        """Random stream owned by one frame of one simulation."""
        return np.random.default_rng([int(self.seed), int(frame_index)])

    def impairments(self, frame_index: int, fast_time_bins: int) -> tuple[np.ndarray, float]:
        """Return the additive noise vector and the jitter phase of a frame."""
        rng = self.frame_rng(frame_index)
        jitter = float(rng.normal(0.0, self.phase_jitter_std_rad)) if self.phase_jitter_std_rad > 0 else 0.0
        if self.awgn_variance > 0:
            scale = math.sqrt(self.awgn_variance / 2.0)
            noise = scale * (rng.standard_normal(fast_time_bins) + 1j * rng.standard_normal(fast_time_bins))
        else:
            noise = np.zeros(fast_time_bins, dtype=np.complex128)
        return noise, jitter


@dataclass(frozen=True)
class PathOverride:
    """Per-segment replacement of a path's motion parameters; None keeps the base value."""

    radial_speed_mps: float | None = None
    micro_amplitude_m: float | None = None
    micro_freq_hz: float | None = None


@dataclass(frozen=True)
class MotionSegment:
    duration_s: float
    overrides: Mapping[int, PathOverride] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _require(self.duration_s > 0, "segment durations must be positive", "MotionSegment")


@dataclass(frozen=True)
class MotionProfile:
    """Time evolution of the moving scatterers that encodes one activity."""

    label: str
    segments: tuple[MotionSegment, ...]
    paths: tuple[PathModel, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        _require(len(self.segments) >= 1, "a motion profile needs at least one segment", "MotionProfile")
        for segment in self.segments:
            for index in segment.overrides:
                _require(0 <= index < len(self.paths), f"override targets unknown path {index}", "MotionProfile")

    @property
    def total_duration_s(self) -> float:
        return sum(segment.duration_s for segment in self.segments)

    def frame_parameters(self, n_frames: int, frame_period_s: float) -> dict[str, np.ndarray]:
        """Expand the segments into per-frame speed and micro-motion arrays of shape (K, P)."""
        n_paths = len(self.paths)
        base = {
            "radial_speed_mps": np.array([p.radial_speed_mps for p in self.paths], dtype=np.float64),
            "micro_amplitude_m": np.array([p.micro_amplitude_m for p in self.paths], dtype=np.float64),
            "micro_freq_hz": np.array([p.micro_freq_hz for p in self.paths], dtype=np.float64),
        }
        params = {name: np.tile(values, (n_frames, 1)).reshape(n_frames, n_paths) for name, values in base.items()}

        # Frames past the scripted duration keep the last segment's parameters.
        start_s = 0.0
        for position, segment in enumerate(self.segments):
            first = int(round(start_s / frame_period_s))
            last = n_frames if position == len(self.segments) - 1 else int(round((start_s + segment.duration_s) / frame_period_s))
            start_s += segment.duration_s
            if first >= n_frames:
                break
            for index, override in segment.overrides.items():
                for name in base:
                    value = getattr(override, name)
                    if value is not None:
                        params[name][first:last, index] = value
        return params

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MotionProfile":
        _unknown_keys(data, {"label", "segments", "paths", "description"}, "MotionProfile")
        segments = []
        for raw in data.get("segments", []):
            _unknown_keys(raw, {"duration_s", "overrides"}, "MotionSegment")
            overrides = {}
            for index, values in (raw.get("overrides") or {}).items():
                _unknown_keys(values, {f for f in PathOverride.__dataclass_fields__}, "PathOverride")
                overrides[int(index)] = PathOverride(**{key: float(value) for key, value in values.items()})
            segments.append(MotionSegment(duration_s=float(raw["duration_s"]), overrides=overrides))
        return cls(
            label=str(data["label"]),
            segments=tuple(segments),
            paths=tuple(PathModel.from_dict(path) for path in data.get("paths", [])),
            description=str(data.get("description", "")),
        )


@dataclass(frozen=True, eq=False)
class FrameMatrix:
    """K x L complex baseband matrix (slow-time frames by fast-time bins)."""

    data: np.ndarray
    radio: RadioConfig
    frame_period_s: float

    def __post_init__(self) -> None:
        _require(self.data.ndim == 2, f"frame data must be 2-D, got shape {self.data.shape}", "FrameMatrix")
        _require(self.data.shape[0] >= 1, "a frame matrix needs at least one frame", "FrameMatrix")
        _require(
            self.data.shape[1] == self.radio.fast_time_bins,
            f"frame width {self.data.shape[1]} does not match fast_time_bins={self.radio.fast_time_bins}",
            "FrameMatrix",
        )
        _require(bool(np.all(np.isfinite(self.data))), "frame data contains non-finite samples", "FrameMatrix")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_bins(self) -> int:
        return self.data.shape[1]

    def with_data(self, data: np.ndarray) -> "FrameMatrix":
        return replace(self, data=data)

    def last(self, n_frames: int) -> "FrameMatrix":
        """The trailing n_frames frames."""
        _require(1 <= n_frames <= self.n_frames, f"cannot take {n_frames} of {self.n_frames} frames", "FrameMatrix.last")
        return self.with_data(self.data[-n_frames:])

    def window(self, start: int, n_frames: int) -> "FrameMatrix":
        _require(0 <= start and start + n_frames <= self.n_frames, "window exceeds the frame matrix", "FrameMatrix.window")
        return self.with_data(self.data[start : start + n_frames])


def _envelope(radio: RadioConfig, t: np.ndarray) -> np.ndarray:
    return radio.pulse_amplitude * np.exp(-((t - radio.pulse_duration_s / 2.0) ** 2) / (2.0 * radio.sigma_p**2))


def _baseband(radio: RadioConfig, delays: np.ndarray, attenuations: np.ndarray) -> np.ndarray:
    """Sum of rotated, delayed pulses; delays (K, P) seconds, attenuations (P,). Returns (K, L)."""
    fast_time = np.arange(radio.fast_time_bins) * radio.adc_interval_s
    if delays.shape[1] == 0:
        return np.zeros((delays.shape[0], radio.fast_time_bins), dtype=np.complex128)
    rotation = attenuations[None, :] * np.exp(1j * 2.0 * np.pi * radio.carrier_freq_hz * delays)
    envelope = _envelope(radio, fast_time[None, None, :] - delays[:, :, None])
    return np.einsum("kp,kpl->kl", rotation, envelope)


def _impair(frames: np.ndarray, noise: NoiseModel, first_frame: int = 0) -> np.ndarray:
    if noise.awgn_variance == 0 and noise.phase_jitter_std_rad == 0:
        return frames
    out = np.empty_like(frames)
    for row in range(frames.shape[0]):
        additive, jitter = noise.impairments(first_frame + row, frames.shape[1])
        out[row] = (frames[row] + additive) * np.exp(1j * jitter)
    return out


def synth_pulse(radio: RadioConfig, n_samples: int) -> np.ndarray:
    """Sample the transmitted Gaussian pulse at the ADC interval."""
    _require(isinstance(n_samples, (int, np.integer)) and n_samples >= 1, "n_samples must be a positive integer", "synth_pulse")
    return _envelope(radio, np.arange(n_samples) * radio.adc_interval_s)


def range_resolution(radio: RadioConfig) -> tuple[float, float]:
    """Return (range resolution in metres, delay resolution in seconds)."""
    _require(radio.bandwidth_hz > 0, "bandwidth_hz must be positive", "range_resolution")
    return radio.propagation_speed_mps / (2.0 * radio.bandwidth_hz), 1.0 / (2.0 * radio.bandwidth_hz)


def _path_delays(radio: RadioConfig, paths: Sequence[PathModel], frame_indices: np.ndarray) -> np.ndarray:
    c = radio.propagation_speed_mps
    ts = radio.frame_period_s
    k = frame_indices[:, None].astype(np.float64)
    ranges = np.array([p.range_m for p in paths], dtype=np.float64)[None, :]
    speeds = np.array([p.radial_speed_mps for p in paths], dtype=np.float64)[None, :]
    betas = np.array([p.micro_amplitude_m for p in paths], dtype=np.float64)[None, :]
    gammas = np.array([p.micro_freq_hz for p in paths], dtype=np.float64)[None, :]
    return 2.0 * ranges / c + 2.0 * speeds * k * ts / c + 2.0 * betas * (1.0 - np.cos(2.0 * np.pi * gammas * k * ts)) / c


def synth_frame(radio: RadioConfig, paths: Sequence[PathModel], frame_index: int, noise: NoiseModel) -> np.ndarray:
    """One fast-time frame (L complex samples) with all delays evaluated at frame_index."""
    _require(frame_index >= 0, "frame_index must be non-negative", "synth_frame")
    paths = list(paths)
    delays = _path_delays(radio, paths, np.array([frame_index])) if paths else np.zeros((1, 0))
    attenuations = np.array([p.attenuation for p in paths], dtype=np.float64)
    frame = _baseband(radio, delays, attenuations)
    return _impair(frame, noise, first_frame=frame_index)[0]


def simulate_activity(
    radio: RadioConfig,
    static_paths: Sequence[PathModel],
    profile: MotionProfile,
    noise: NoiseModel,
    duration_s: float,
) -> FrameMatrix:
    """Simulate a scene of static clutter plus the profile's moving scatterers."""
    _require(duration_s > 0, "duration_s must be positive", "simulate_activity")
    n_frames = int(round(duration_s * radio.pulse_repetition_hz))
    _require(n_frames >= 1, "duration is shorter than one frame period", "simulate_activity")
    ts = radio.frame_period_s
    c = radio.propagation_speed_mps
    frame_indices = np.arange(n_frames)

    static_paths = list(static_paths)
    delays = [_path_delays(radio, static_paths, frame_indices)] if static_paths else []
    attenuations = [p.attenuation for p in static_paths]

    if profile.paths:
        params = profile.frame_parameters(n_frames, ts)
        # R(k+1) = R(k) + v(k) Ts, so speed changes accumulate displacement.
        start = np.array([p.range_m for p in profile.paths], dtype=np.float64)
        displacement = np.vstack([np.zeros((1, len(profile.paths))), np.cumsum(params["radial_speed_mps"][:-1] * ts, axis=0)])
        ranges = start[None, :] + displacement
        if np.any(ranges <= 0):
            raise ChannelError(f"profile '{profile.label}' drives a scatterer through the antenna", operation="simulate_activity")
        k = frame_indices[:, None].astype(np.float64)
        micro = 2.0 * params["micro_amplitude_m"] * (1.0 - np.cos(2.0 * np.pi * params["micro_freq_hz"] * k * ts)) / c
        delays.append(2.0 * ranges / c + micro)
        attenuations.extend(p.attenuation for p in profile.paths)

    all_delays = np.hstack(delays) if delays else np.zeros((n_frames, 0))
    data = _impair(_baseband(radio, all_delays, np.asarray(attenuations, dtype=np.float64)), noise)
    get_logger().info(f"Simulated '{profile.label}': {n_frames} frames x {radio.fast_time_bins} bins, {all_delays.shape[1]} paths")
    return FrameMatrix(data=data, radio=radio, frame_period_s=ts)
