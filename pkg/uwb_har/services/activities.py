# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/services/activities.py
# ----------------------------------------------------------------------------------
# Purpose:
# Library of scripted scenes for the simulator: the seven activity classes as
# multi-scatterer motion profiles, the simulated environments (static clutter,
# floor reflection, noise level) and the builder that combines both into a
# complete scene ready for simulate_activity.
#
# Geometry: the transceiver is ceiling mounted at mount_height_m and looks down.
# A scatterer at height z and horizontal distance d sits at range
# sqrt((mount_height_m - z)^2 + d^2); its reflection amplitude falls off as
# gain / range^2. Vertical and horizontal body velocities are projected onto the
# line of sight to give the radial speeds the simulator integrates.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from uwb_har.services.channel import ChannelError, MotionProfile, MotionSegment, NoiseModel, PathModel, PathOverride, RadioConfig

__all__ = [
    "Activity",
    "Environment",
    "Scene",
    "SceneConfig",
    "activity_profile",
    "build_scene",
    "default_environments",
    "empty_profile",
    "environment",
    "idle_profile",
]


class Activity(Enum):
    """The seven activity classes, in class-index order."""

    BENDING = "bending"
    FALLING = "falling"
    LYING_DOWN = "lying_down"
    STANDING_UP = "standing_up"
    SITTING_DOWN = "sitting_down"
    SQUATTING_DOWN = "squatting_down"
    WALKING = "walking"

    @property
    def index(self) -> int:
        return list(Activity).index(self)

    @property
    def code(self) -> str:
        return _CODES[self]

    @classmethod
    def from_index(cls, index: int) -> "Activity":
        return list(cls)[index]

    @classmethod
    def parse(cls, value: str) -> "Activity":
        """Accept a class name ("sitting_down") or its short code ("SD")."""
        for activity in cls:
            if value.lower() in (activity.value, activity.code.lower()):
                return activity
        raise ChannelError(f"Unknown activity '{value}'", operation="Activity.parse")


_CODES = {
    Activity.BENDING: "B",
    Activity.FALLING: "F",
    Activity.LYING_DOWN: "L",
    Activity.STANDING_UP: "SU",
    Activity.SITTING_DOWN: "SD",
    Activity.SQUATTING_DOWN: "SQ",
    Activity.WALKING: "W",
}

# Scatterer order in every human profile.
HEAD, TORSO, LEGS = 0, 1, 2
_SCATTERER_GAINS = (0.5, 1.0, 0.6)
_STANDING_HEIGHTS = (1.6, 1.2, 0.5)
_SEATED_HEIGHTS = (1.1, 0.7, 0.4)

# Per activity: starting posture, motion duration range (s) and per-scatterer
# (vertical speed, horizontal speed) in m/s. Vertical speed is positive toward the
# floor, horizontal speed positive away from the point below the sensor.
_KINEMATICS: dict[Activity, dict[str, Any]] = {
    Activity.BENDING: {"heights": _STANDING_HEIGHTS, "duration": (0.5, 0.7), "velocity": ((1.0, 0.15), (0.5, 0.1), (0.0, 0.0))},
    Activity.FALLING: {"heights": _STANDING_HEIGHTS, "duration": (0.35, 0.45), "velocity": ((2.5, 0.4), (1.6, 0.3), (0.3, 0.1))},
    Activity.LYING_DOWN: {"heights": _SEATED_HEIGHTS, "duration": (0.8, 0.95), "velocity": ((0.6, 0.5), (0.4, 0.3), (0.05, 0.2))},
    Activity.STANDING_UP: {"heights": _SEATED_HEIGHTS, "duration": (0.6, 0.8), "velocity": ((-0.8, 0.0), (-0.6, 0.0), (-0.1, 0.0))},
    Activity.SITTING_DOWN: {"heights": _STANDING_HEIGHTS, "duration": (0.6, 0.8), "velocity": ((0.7, 0.0), (0.7, 0.0), (0.0, -0.3))},
    Activity.SQUATTING_DOWN: {"heights": _STANDING_HEIGHTS, "duration": (0.5, 0.7), "velocity": ((0.9, 0.0), (0.9, 0.0), (0.4, 0.0))},
}
_WALK_SPEED = (0.8, 1.2)
_GAIT_FREQ_HZ = (1.6, 2.0)


@dataclass(frozen=True)
class SceneConfig:
    """Geometry and timing shared by every simulated scene."""

    mount_height_m: float = 2.7
    warmup_s: float = 0.5
    window_s: float = 1.0
    human_gain: float = 1.0
    floor_gain: float = 1.0
    phase_jitter_std_rad: float = 0.05
    breathing_amplitude_m: float = 0.005
    breathing_freq_hz: float = 0.3

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ChannelError(f"{name} must be finite and non-negative", operation="SceneConfig", kind="config")
        if self.window_s <= 0 or self.mount_height_m <= max(_STANDING_HEIGHTS):
            raise ChannelError("window_s must be positive and the mount above head height", operation="SceneConfig", kind="config")

    @property
    def duration_s(self) -> float:
        return self.warmup_s + self.window_s


@dataclass(frozen=True)
class Environment:
    """A simulated room: static clutter layout, receiver noise and subject position."""

    env_id: int
    clutter: tuple[PathModel, ...] = ()
    awgn_variance: float = 1e-6
    human_offset_m: float = 1.5

    def static_paths(self, scene: SceneConfig) -> list[PathModel]:
        # The floor is the dominant static reflector and anchors phase correction.
        floor = PathModel(attenuation=scene.floor_gain, range_m=scene.mount_height_m)
        return [floor, *self.clutter]

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Environment":
        allowed = {"env_id", "clutter", "awgn_variance", "human_offset_m"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ChannelError(f"Unknown keys {unknown}", operation="Environment", kind="config")
        return cls(
            env_id=int(data["env_id"]),
            clutter=tuple(PathModel.from_dict(path) for path in data.get("clutter", [])),
            awgn_variance=float(data.get("awgn_variance", 1e-6)),
            human_offset_m=float(data.get("human_offset_m", 1.5)),
        )


@dataclass(frozen=True)
class Scene:
    """Everything simulate_activity needs for one sample."""

    static_paths: tuple[PathModel, ...]
    profile: MotionProfile
    noise: NoiseModel
    duration_s: float
    environment_id: int
    distance_m: float = field(default=0.0)


def environment(env_id: int, seed: int = 0, radio: RadioConfig | None = None) -> Environment:
    """Deterministically derive a room layout for an environment id."""
    radio = radio or RadioConfig()
    rng = np.random.default_rng([int(seed), 7919, int(env_id)])
    n_clutter = int(rng.integers(3, 6))
    max_range = min(radio.max_range_m - 0.3, 6.0)
    clutter = tuple(
        PathModel(attenuation=float(rng.uniform(0.05, 0.3)), range_m=float(rng.uniform(0.8, max_range)))
        for _ in range(n_clutter)
    )
    return Environment(
        env_id=int(env_id),
        clutter=clutter,
        awgn_variance=float(1e-6 * rng.uniform(1.0, 4.0)),
        human_offset_m=float(rng.uniform(1.0, 3.0)),
    )


def default_environments(n_environments: int = 7, seed: int = 0, radio: RadioConfig | None = None) -> list[Environment]:
    return [environment(env_id, seed=seed, radio=radio) for env_id in range(n_environments)]


def _scatterers(scene: SceneConfig, heights: tuple[float, ...], distance_m: float, rng: np.random.Generator) -> list[PathModel]:
    paths = []
    for gain, height in zip(_SCATTERER_GAINS, heights):
        height = height * rng.uniform(0.95, 1.05)
        range_m = math.hypot(scene.mount_height_m - height, distance_m)
        paths.append(PathModel(attenuation=scene.human_gain * gain / range_m**2, range_m=range_m))
    return paths


def _radial(path: PathModel, scene: SceneConfig, distance_m: float, vertical: float, horizontal: float) -> float:
    # Range grows with distance along both axes: down toward the floor and away horizontally.
    vertical_extent = math.sqrt(max(path.range_m**2 - distance_m**2, 0.0))
    return (vertical * vertical_extent + horizontal * distance_m) / path.range_m


def idle_profile(scene: SceneConfig, distance_m: float, rng: np.random.Generator, label: str = "idle") -> MotionProfile:
    """A person standing still, breathing: no activity to detect."""
    paths = _scatterers(scene, _STANDING_HEIGHTS, distance_m, rng)
    breathing = {TORSO: PathOverride(micro_amplitude_m=scene.breathing_amplitude_m, micro_freq_hz=scene.breathing_freq_hz)}
    return MotionProfile(label=label, segments=(MotionSegment(scene.duration_s, breathing),), paths=tuple(paths), description="standing still")


def activity_profile(activity: Activity, rng: np.random.Generator, scene: SceneConfig, distance_m: float) -> MotionProfile:
    """Script one randomized instance of an activity at a horizontal distance."""
    breathing = PathOverride(micro_amplitude_m=scene.breathing_amplitude_m, micro_freq_hz=scene.breathing_freq_hz)

    if activity is Activity.WALKING:
        paths = _scatterers(scene, _STANDING_HEIGHTS, distance_m, rng)
        speed = rng.uniform(*_WALK_SPEED)
        # Walk away when close to the point below the sensor so ranges stay positive.
        direction = 1.0 if distance_m < 2.0 or rng.random() < 0.5 else -1.0
        gait = rng.uniform(*_GAIT_FREQ_HZ)
        overrides = {
            index: PathOverride(
                radial_speed_mps=_radial(path, scene, distance_m, 0.0, direction * speed),
                micro_amplitude_m=(0.04 if index == LEGS else 0.01),
                micro_freq_hz=gait,
            )
            for index, path in enumerate(paths)
        }
        segments = (MotionSegment(scene.duration_s, overrides),)
        return MotionProfile(label=activity.value, segments=segments, paths=tuple(paths), description=f"walking at {speed:.2f} m/s")

    kinematics = _KINEMATICS[activity]
    paths = _scatterers(scene, kinematics["heights"], distance_m, rng)
    scale = rng.uniform(0.85, 1.15)
    motion_s = rng.uniform(*kinematics["duration"])
    onset_s = scene.warmup_s + rng.uniform(0.05, max(0.06, scene.window_s - motion_s - 0.05))
    moving = {
        index: PathOverride(radial_speed_mps=scale * _radial(path, scene, distance_m, vertical, horizontal))
        for index, (path, (vertical, horizontal)) in enumerate(zip(paths, kinematics["velocity"]))
    }
    segments = (
        MotionSegment(onset_s, {TORSO: breathing}),
        MotionSegment(motion_s, moving),
        MotionSegment(max(scene.duration_s - onset_s - motion_s, 1e-3), {TORSO: breathing}),
    )
    return MotionProfile(label=activity.value, segments=segments, paths=tuple(paths), description=f"{activity.value} over {motion_s:.2f} s")


def empty_profile(scene: SceneConfig) -> MotionProfile:
    """No subject in the room: only static clutter and receiver noise remain."""
    return MotionProfile(label="empty", segments=(MotionSegment(scene.duration_s),), description="empty room")


def build_scene(
    activity: Activity | None,
    env: Environment,
    scene: SceneConfig,
    seed: int,
    distance_m: float | None = None,
    sample_index: int = 0,
    occupied: bool = True,
) -> Scene:
    """Combine an environment and an activity into a scene.

    With `activity=None` the subject stands still (`occupied=True`) or the room is empty.
    Every (seed, environment, activity, sample_index) tuple yields its own random instance.
    """
    class_key = activity.index + 1 if activity is not None else (0 if occupied else len(Activity) + 1)
    rng = np.random.default_rng([int(seed), int(env.env_id), class_key, int(sample_index)])
    distance = env.human_offset_m if distance_m is None else float(distance_m)
    if activity is not None:
        profile = activity_profile(activity, rng, scene, distance)
    elif occupied:
        profile = idle_profile(scene, distance, rng)
    else:
        profile = empty_profile(scene)
    noise = NoiseModel(awgn_variance=env.awgn_variance, phase_jitter_std_rad=scene.phase_jitter_std_rad, seed=int(rng.integers(0, 2**31 - 1)))
    return Scene(
        static_paths=tuple(env.static_paths(scene)),
        profile=profile,
        noise=noise,
        duration_s=scene.duration_s,
        environment_id=env.env_id,
        distance_m=distance,
    )
