# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/__init__.py
# ----------------------------------------------------------------------------------
# Purpose:
# This module initializes the utils package for UWB-HAR.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

from uwb_har.utils.config import DatabaseConfig, LoggingConfig, RuntimeConfig
from uwb_har.utils.database import DatabaseManager, DBException
from uwb_har.utils.errors import UwbHarError
from uwb_har.utils.logger import get_logger

__all__ = ["DatabaseConfig", "DatabaseManager", "DBException", "LoggingConfig", "RuntimeConfig", "UwbHarError", "get_logger"]
