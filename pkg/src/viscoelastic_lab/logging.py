"""
Logging configuration for viscoelastic-lab.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
COMPONENT = "viscoelastic-lab"


def configure_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    component: str = COMPONENT,
    quiet: bool = False,
) -> logging.Logger:
    """
    Configure the laboratory logger.

    Args:
        level: The logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional path to a log file; missing parent directories are
            created
        component: The logger name
        quiet: Raise the level to at least WARNING

    Returns:
        A configured logger instance
    """
    numeric_level = logging.getLevelNamesMapping().get(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {level}")
    if quiet:
        numeric_level = max(numeric_level, logging.WARNING)

    logger = logging.getLogger(component)
    logger.setLevel(numeric_level)
    logger.handlers = []  # Reconfiguring replaces earlier handlers
    formatter = logging.Formatter(LOG_FORMAT)

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(path))
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


# Default logger
logger = configure_logging()
