import logging
import sys
from typing import Optional, Union

from src import config

_HANDLER_NAME = "instanton-console"


def setup_logging(level: Optional[Union[int, str]] = None):
    """Set up logging configuration"""
    if level is None:
        level = config.LOG_LEVEL
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.WARNING)

    # Create logger
    logger = logging.getLogger()
    logger.setLevel(level)

    # Reuse the console handler on repeated calls
    for handler in logger.handlers:
        if handler.get_name() == _HANDLER_NAME:
            handler.setLevel(level)
            return logger

    # Console handler on stderr so stdout carries only reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.set_name(_HANDLER_NAME)
    console_handler.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - [%(name)s] - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)

    logger.addHandler(console_handler)

    return logger
