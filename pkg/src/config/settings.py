"""
Configuration settings
"""

import logging
import os


class Settings:
    """Application settings"""

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")

    # Terminal output ("0" disables ANSI colors)
    COLOR: str = os.getenv("MPST_COLOR", "1")

    # Exploration bounds used when a command does not give them
    DEFAULT_MAX_TRACE_LEN: int = 64
    DEFAULT_QUEUE_BOUND: int = 4

    # Type checking mode
    DEFAULT_CHECK_MODE: str = "standard"

    # API settings (if running as API)
    API_HOST: str = os.getenv("API_HOST", "0.0.0.0")
    API_PORT: int = int(os.getenv("API_PORT", "8000"))
    API_DEBUG: bool = os.getenv("API_DEBUG", "false").lower() == "true"

    @classmethod
    def log_level(cls) -> int:
        """Numeric logging level from env, WARNING when unrecognized"""
        level = logging.getLevelName(os.getenv("LOG_LEVEL", cls.LOG_LEVEL).upper())
        return level if isinstance(level, int) else logging.WARNING

    @classmethod
    def color_enabled(cls) -> bool:
        return os.getenv("MPST_COLOR", cls.COLOR) != "0"

    @classmethod
    def get_check_mode(cls):
        """Get default check mode from env or default"""
        from ..mpst.typechecker import CheckMode

        mode_str = os.getenv("MPST_CHECK_MODE", cls.DEFAULT_CHECK_MODE)
        try:
            return CheckMode(mode_str.lower())
        except ValueError:
            return CheckMode(cls.DEFAULT_CHECK_MODE)

    @classmethod
    def default_bounds(cls):
        """Get default exploration bounds from env, falling back on invalid values"""
        from ..mpst.verifier import Bounds

        return Bounds(
            max_trace_len=cls._positive_int("MPST_DEPTH", cls.DEFAULT_MAX_TRACE_LEN),
            max_queue_per_channel=cls._positive_int("MPST_QUEUE_BOUND", cls.DEFAULT_QUEUE_BOUND),
        )

    @staticmethod
    def _positive_int(variable: str, default: int) -> int:
        try:
            value = int(os.getenv(variable, str(default)))
        except ValueError:
            return default
        return value if value >= 1 else default
