# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/services/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module initializes the services package for UWB-HAR: channel simulation,
# scripted activities, signal preprocessing and spectrogram features.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from uwb_har.services.activities import Activity, Environment, Scene, SceneConfig, activity_profile, build_scene, environment
from uwb_har.services.channel import ChannelError, FrameMatrix, MotionProfile, NoiseModel, PathModel, RadioConfig, simulate_activity, synth_frame
from uwb_har.services.dsp import DetectorConfig, DSPError, MotionReport, detect_motion, detect_window, preprocess
from uwb_har.services.features import FeatureError, Spectrogram, doppler_spectrogram, normalize, time_spectrogram

__all__ = [
    "Activity",
    "ChannelError",
    "DSPError",
    "DetectorConfig",
    "Environment",
    "FeatureError",
    "FrameMatrix",
    "MotionProfile",
    "MotionReport",
    "NoiseModel",
    "PathModel",
    "RadioConfig",
    "Scene",
    "SceneConfig",
    "Spectrogram",
    "activity_profile",
    "build_scene",
    "detect_motion",
    "detect_window",
    "doppler_spectrogram",
    "environment",
    "normalize",
    "preprocess",
    "simulate_activity",
    "synth_frame",
    "time_spectrogram",
]
