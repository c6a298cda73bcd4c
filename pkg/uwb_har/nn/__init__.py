# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/nn/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module initializes the from-scratch network package for UWB-HAR.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from uwb_har.nn.layers import Block, block_forward
from uwb_har.nn.network import FusionNetwork, LayerRow, backward, flop_count, forward, param_count
from uwb_har.nn.ops import NetworkError
from uwb_har.nn.specs import NUM_CLASSES, BlockSpec, LayerSpec, NetworkSpec, OpKind
from uwb_har.nn.training import GradientCheck, TrainingConfig, TrainingError, TrainingHistory, TrainingSet, gradient_check, train

__all__ = [
    "Block",
    "BlockSpec",
    "FusionNetwork",
    "GradientCheck",
    "LayerRow",
    "LayerSpec",
    "NUM_CLASSES",
    "NetworkError",
    "NetworkSpec",
    "OpKind",
    "TrainingConfig",
    "TrainingError",
    "TrainingHistory",
    "TrainingSet",
    "backward",
    "block_forward",
    "flop_count",
    "forward",
    "gradient_check",
    "param_count",
    "train",
]
