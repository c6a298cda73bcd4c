# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module is the main package initializer for UWB-HAR, a simulated UWB radar
# human activity recognition pipeline.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from uwb_har.utils import DatabaseManager, UwbHarError, get_logger

__version__ = "0.1.0"

__all__ = ["DatabaseManager", "UwbHarError", "get_logger", "__version__"]
