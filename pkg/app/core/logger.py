# app/core/logger.py
import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from app.core.config import settings

FORMAT = (
    "[<red>{time:HH:mm:ss}</red>] | "
    "<cyan>{name}.{function}.{line}</cyan> | "
    "<yellow>{level}</yellow> | "
    "<cyan>{message}</cyan>"
)


def setup_logger(debug: bool = False, log_file: Optional[Path] = None):
    """Route harness logs to stderr, and to log_file when given.

    Args:
        debug: Whether to enable debug logging (per-check residuals)
        log_file: Optional plain-text log written alongside the artifacts
    """
    logger.remove()
    level = "DEBUG" if debug else "INFO"

    # stdout is reserved for CLI tables
    logger.add(sys.stderr, level=level, format=FORMAT, colorize=True, enqueue=True)
    if log_file is not None:
        logger.add(str(log_file), level=level, format=FORMAT, colorize=False, enqueue=True)

    return logger


logger = setup_logger(debug=settings.DEBUG, log_file=settings.LOG_FILE)
