"""
Logging configuration.
"""
import logging
import sys
from typing import Optional

from config.settings import LOG_LEVEL
from src.core.errors import ConfigError

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging to stderr.

    Args:
        level: Level name; defaults to LULC_LOG_LEVEL
    """
    level_name = (level or LOG_LEVEL).upper()
    numeric = getattr(logging, level_name, None)
    if not isinstance(numeric, int):
        raise ConfigError(f"Unknown log level: {level_name}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, stream=sys.stderr, force=True)
