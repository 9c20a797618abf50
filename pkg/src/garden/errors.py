"""Exception types shared across the package."""

from __future__ import annotations


class GardenError(Exception):
    """Base error carrying a stable machine-readable ``code``.

    Codes are snake_case strings that survive into CLI stderr output and
    API error bodies, so downstream tooling can match on them.
    """

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code
        self.message = message or code


class ConfigError(GardenError):
    """Invalid pipeline configuration, operator name or parameter."""

    def __init__(self, message: str, code: str = "config_invalid"):
        super().__init__(code, message)


class ModelError(GardenError):
    """Language-model training or (de)serialization failure."""
