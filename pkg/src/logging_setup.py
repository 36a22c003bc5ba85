"""Root logging configuration for the CLI and scripts."""

import logging
import sys
from typing import Optional

from src.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install a single stdout handler on the package logger.

    Args:
        level: Logging level name; defaults to ``settings.log_level``.
    """
    logger = logging.getLogger("src")
    logger.setLevel((level or settings.log_level).upper())
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    logger.propagate = False
