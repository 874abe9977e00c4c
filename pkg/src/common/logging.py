import logging
import sys
from typing import Optional


def setup_logger(name: str = "src", level: int = logging.INFO, logfile: Optional[str] = None) -> logging.Logger:
    """
    Configure a named logger. Calling it with "src" wires every library module
    logger (``logging.getLogger(__name__)`` under ``src.*``) to the same handlers.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers.clear()

    fmt = logging.Formatter("%(asctime)s | %(levelname)s | %(name)s | %(message)s")

    sh = logging.StreamHandler(sys.stdout)
    sh.setFormatter(fmt)
    logger.addHandler(sh)

    if logfile:
        fh = logging.FileHandler(logfile)
        fh.setFormatter(fmt)
        logger.addHandler(fh)

    logger.propagate = False
    return logger


def parse_level(level: str) -> int:
    value = logging.getLevelName(level.upper())
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level: {level!r}")
    return value
