# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/run_config.py
# ----------------------------------------------------------------------------------
# Purpose:
# YAML run configuration shared by every CLI stage. Each section maps onto a
# frozen dataclass; unknown keys, wrong types and invariant violations raise
# ConfigError before any stage runs. Omitted keys take the documented defaults.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from uwb_har.nn.specs import BRANCHES, NetworkSpec
from uwb_har.nn.training import TrainingConfig
from uwb_har.services.activities import Activity, Environment, SceneConfig, environment
from uwb_har.services.channel import RadioConfig
from uwb_har.services.dsp import DetectorConfig
from uwb_har.utils.config import RuntimeConfig
from uwb_har.utils.errors import UwbHarError

__all__ = [
    "BenchSection",
    "ConfigError",
    "DatasetSection",
    "EnvironmentsSection",
    "EvaluationSection",
    "NetworkSection",
    "NoiseSection",
    "RegistrySection",
    "RunConfig",
]


class ConfigError(UwbHarError):
    """Exception raised for invalid run configurations."""

    def __init__(self, message: str, operation: str = "config", original_error: Exception | None = None) -> None:
        super().__init__(message, operation=operation, kind="config", original_error=original_error)


@dataclass(frozen=True)
class NoiseSection:
    """awgn_scale multiplies every environment's noise variance (SNR calibration)."""

    awgn_scale: float = 1.0
    phase_jitter_std_rad: float = 0.05

    def __post_init__(self) -> None:
        if self.awgn_scale < 0 or self.phase_jitter_std_rad < 0:
            raise ConfigError("noise levels must be non-negative", operation="noise")


@dataclass(frozen=True)
class EnvironmentsSection:
    train: tuple[int, ...] = (0, 1)
    test: tuple[int, ...] = (2, 3)
    custom: tuple[Mapping[str, Any], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "train", tuple(int(i) for i in self.train))
        object.__setattr__(self, "test", tuple(int(i) for i in self.test))
        object.__setattr__(self, "custom", tuple(self.custom))


@dataclass(frozen=True)
class NetworkSection:
    kernel: int = 3
    dilation: int = 2
    channels: tuple[int, ...] = (16, 32, 64)
    reduce_groups: tuple[int, ...] = (1, 4, 4)
    stride: int = 2
    head_hidden: int = 128
    branches: tuple[str, ...] = BRANCHES
    pool_grid: tuple[int, int] = (5, 2)

    def __post_init__(self) -> None:
        for name in ("channels", "reduce_groups", "branches", "pool_grid"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


@dataclass(frozen=True)
class DatasetSection:
    """Samples per class and environment; `activities` empty means all seven classes."""

    train_samples_per_class: int = 50
    test_samples_per_class: int = 50
    activities: tuple[str, ...] = ()
    check_motion: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "activities", tuple(self.activities))
        if self.train_samples_per_class < 1 or self.test_samples_per_class < 1:
            raise ConfigError("samples per class must be >= 1", operation="dataset")
        for name in self.activities:
            try:
                Activity.parse(name)
            except UwbHarError as e:
                raise ConfigError(f"unknown activity '{name}'", operation="dataset", original_error=e)


@dataclass(frozen=True)
class BenchSection:
    runs: int = 1000
    warmup: int = 10

    def __post_init__(self) -> None:
        if self.runs < 1000:
            raise ConfigError(f"bench needs at least 1000 runs, got {self.runs}", operation="bench")
        if self.warmup < 0:
            raise ConfigError("bench warmup must be >= 0", operation="bench")


@dataclass(frozen=True)
class RegistrySection:
    """Shared run registry; `uri` (any SQLAlchemy URL) wins over the SQLite `path`."""

    enabled: bool = True
    uri: str | None = None
    path: str = "registry/registry.sqlite"

    def __post_init__(self) -> None:
        if not isinstance(self.path, str) or not self.path:
            raise ConfigError("registry.path must be a non-empty path string", operation="registry")


@dataclass(frozen=True)
class EvaluationSection:
    ablation_seeds: tuple[int, ...] = (0, 1, 2)
    kernels: tuple[int, ...] = (3, 5, 7, 9)
    distances_m: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
    windows_per_distance: int = 200
    far_windows: int = 1000

    def __post_init__(self) -> None:
        for name in ("ablation_seeds", "kernels", "distances_m"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.ablation_seeds or self.windows_per_distance < 1 or self.far_windows < 1:
            raise ConfigError("evaluation needs seeds and positive window counts", operation="evaluation")


def _section(cls, data: Any, name: str, exclude: tuple[str, ...] = ()):
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"section '{name}' must be a mapping", operation=name)
    allowed = {f.name for f in fields(cls) if f.init} - set(exclude)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(f'{name}.{key}' for key in unknown)}", operation=name)
    try:
        return cls(**dict(data))
    except ConfigError:
        raise
    except (UwbHarError, TypeError, ValueError) as e:
        raise ConfigError(f"invalid '{name}' section: {e}", operation=name, original_error=e)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; `with_overrides` applies the CLI flags."""

    seed: int = 0
    threads: int = field(default_factory=lambda: RuntimeConfig().threads)
    out: str = "out"
    radio: RadioConfig = field(default_factory=RadioConfig)
    noise: NoiseSection = field(default_factory=NoiseSection)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    environments: EnvironmentsSection = field(default_factory=EnvironmentsSection)
    network: NetworkSection = field(default_factory=NetworkSection)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    dataset: DatasetSection = field(default_factory=DatasetSection)
    bench: BenchSection = field(default_factory=BenchSection)
    registry: RegistrySection = field(default_factory=RegistrySection)
    evaluation: EvaluationSection = field(default_factory=EvaluationSection)

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}", operation="seed")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}", operation="threads")
        if self.scene.phase_jitter_std_rad != self.noise.phase_jitter_std_rad:
            object.__setattr__(self, "scene", replace(self.scene, phase_jitter_std_rad=self.noise.phase_jitter_std_rad))
        window_frames = round(self.scene.window_s * self.radio.pulse_repetition_hz)
        if window_frames != self.detector.window_frames:
            raise ConfigError(
                f"scene.window_s covers {window_frames} frames but detector.window_frames is {self.detector.window_frames}",
                operation="detector",
            )
        try:
            self.network_spec()
        except UwbHarError as e:
            raise ConfigError(f"invalid 'network' section: {e}", operation="network", original_error=e)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "RunConfig":
        data = dict(data or {})
        sections = {
            "radio": (RadioConfig, ()),
            "noise": (NoiseSection, ()),
            "detector": (DetectorConfig, ()),
            "scene": (SceneConfig, ("phase_jitter_std_rad",)),
            "environments": (EnvironmentsSection, ()),
            "network": (NetworkSection, ()),
            "training": (TrainingConfig, ()),
            "dataset": (DatasetSection, ()),
            "bench": (BenchSection, ()),
            "registry": (RegistrySection, ()),
            "evaluation": (EvaluationSection, ()),
        }
        unknown = sorted(set(data) - set(sections) - {"seed", "threads", "out"})
        if unknown:
            raise ConfigError(f"unknown key(s) {', '.join(unknown)}", operation="config")
        kwargs = {name: _section(cls_, data.get(name), name, exclude) for name, (cls_, exclude) in sections.items()}
        for name in ("seed", "threads", "out"):
            if name in data:
                kwargs[name] = data[name]
        if not isinstance(kwargs.get("out", "out"), str):
            raise ConfigError("out must be a path string", operation="out")
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        """Load a YAML file; no path means all defaults."""
        if path is None:
            return cls.from_dict({})
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}", original_error=e)
        except yaml.YAMLError as e:
            raise ConfigError(f"config {path} is not valid YAML: {e}", original_error=e)
        if data is not None and not isinstance(data, Mapping):
            raise ConfigError(f"config {path} must be a mapping at the top level")
        return cls.from_dict(data)

    def with_overrides(self, seed: int | None = None, threads: int | None = None, out: str | None = None) -> "RunConfig":
        changes = {key: value for key, value in (("seed", seed), ("threads", threads), ("out", out)) if value is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; identifies a configuration in the run registry."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def input_shape(self) -> tuple[int, int]:
        return self.detector.window_frames, self.radio.fast_time_bins

    def network_spec(self, **overrides: Any) -> NetworkSpec:
        """Default block layout from the network section; keyword overrides replace single fields."""
        params = asdict(self.network) | overrides
        return NetworkSpec.default(input_shape=self.input_shape, **params)

    def activities(self) -> list[Activity]:
        return [Activity.parse(name) for name in self.dataset.activities] or list(Activity)

    def environment(self, env_id: int) -> Environment:
        """Custom layout when configured, otherwise derived from the seed; noise scaled by awgn_scale."""
        base = None
        for raw in self.environments.custom:
            if int(raw.get("env_id", -1)) == env_id:
                try:
                    base = Environment.from_dict(raw)
                except (UwbHarError, TypeError, ValueError, KeyError) as e:
                    raise ConfigError(f"invalid custom environment {env_id}: {e}", operation="environments", original_error=e)
        if base is None:
            base = environment(env_id, seed=self.seed, radio=self.radio)
        return replace(base, awgn_variance=base.awgn_variance * self.noise.awgn_scale)
