#!/usr/bin/env python3
"""
Exception hierarchy for vpmc

Each error carries enough context (config key, step index, file line) for the
CLI to print a useful message and pick the exit code.
"""

from typing import Optional


class VPMCError(Exception):
    """Base class for all vpmc errors"""


class ArgumentError(VPMCError, ValueError):
    """Invalid argument passed to a library routine"""


class ConfigError(VPMCError, ValueError):
    """Invalid, unknown or missing configuration entry"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key


class ModelError(VPMCError, ValueError):
    """Physically inconsistent input (e.g. non-neutral plasma for a periodic field)"""


class NumericError(VPMCError, ArithmeticError):
    """Non-finite state or failed numerical kernel"""

    def __init__(self, message: str, step: Optional[int] = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class SequencingError(VPMCError, RuntimeError):
    """Forward and backward histories do not line up"""


class FormatError(VPMCError, ValueError):
    """Malformed input file"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(location + message)
        self.path = path
        self.line = line
