"""Logger configuration for the command line entry point."""

import logging
import os
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

LOG_LEVEL_ENV = "SPILLKIT_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "WARNING"


def resolve_log_level(level: Optional[str] = None) -> int:
    """
    Resolve the effective log level.

    An explicit ``level`` wins over the ``SPILLKIT_LOG_LEVEL`` environment
    variable, which wins over the default (WARNING). Unknown names fall back
    to the default.

    Example:
        >>> resolve_log_level("debug") == logging.DEBUG
        True
    """
    name = (level or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
    value = logging.getLevelName(name)
    if not isinstance(value, int):
        value = logging.getLevelName(DEFAULT_LOG_LEVEL)
    return value


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a single rich handler to the ``spillkit`` logger.

    Library modules only create loggers; handlers are installed here by the CLI.
    Calling this twice replaces the handler rather than stacking a second one.
    """
    logger = logging.getLogger("spillkit")
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(resolve_log_level(level))
    logger.propagate = False
    return logger
