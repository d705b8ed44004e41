import logging
import sys

from oddforms.core.config import get_settings

PACKAGE = "oddforms"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _level(debug: bool) -> int:
    return logging.DEBUG if debug else logging.INFO


def setup_logger(name: str = PACKAGE) -> logging.Logger:
    """
    Configure and return a logger instance.

    Records go to stderr; stdout carries the check summary of the CLI.
    """
    level = _level(get_settings().debug)
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Reset so re-imports don't stack handlers
    logger.handlers = []

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    logger.addHandler(handler)
    logger.propagate = False

    return logger


def set_debug(enabled: bool) -> None:
    """Switch every oddforms logger and its handlers to DEBUG or back to INFO."""
    level = _level(enabled)
    for name, existing in logging.root.manager.loggerDict.items():
        if name.split(".")[0] != PACKAGE or not isinstance(existing, logging.Logger):
            continue
        existing.setLevel(level)
        for handler in existing.handlers:
            handler.setLevel(level)
