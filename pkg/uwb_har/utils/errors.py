# ----------------------------------------------------------------------------------
# Project: UWB-HAR
# File: uwb_har/utils/errors.py
# ----------------------------------------------------------------------------------
# Purpose:
# Base exception shared by the UWB-HAR modules. Each module subclasses it with its
# own error type so callers can tell which stage failed.
# ----------------------------------------------------------------------------------
# Copyright (c) 2026 UWB-HAR contributors
# ----------------------------------------------------------------------------------

__all__ = ["UwbHarError"]


class UwbHarError(Exception):
    """Base exception for UWB-HAR operations."""

    def __init__(self, message: str, operation: str, kind: str = "invalid-argument", original_error: Exception | None = None):
        self.message = message
        self.operation = operation
        self.kind = kind
        self.original_error = original_error
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message

    def one_line(self) -> str:
        """Render the error as a single machine-parsable line."""
        message = self.message.replace("\n", " ").replace('"', "'")
        return f'error kind={self.kind} operation={self.operation} message="{message}"'
