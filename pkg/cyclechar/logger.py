"""
Package logger for cyclechar.

Usage:
    from cyclechar.logger import setup_logger, logger, timed

    setup_logger(filepath="runs/selftest.log", level="DEBUG")

    logger.info("task start: name=%s kind=%s", "rank-one", "index-pairing")
    with timed("character k=%d", 2):
        ...

Reports are written to stdout; every handler here writes to stderr or a file.
"""

import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional, Union

logger = logging.getLogger("cyclechar")
logger.addHandler(logging.NullHandler())

_FMT = "%(asctime)s - %(levelname)s - %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"

Level = Union[str, int]


def _level(level: Level) -> int:
    if isinstance(level, str):
        return getattr(logging, level.upper(), logging.INFO)
    return level


def _attach(handler: logging.Handler, level: int, formatter: logging.Formatter) -> None:
    handler.setLevel(level)
    handler.setFormatter(formatter)
    logger.addHandler(handler)


def setup_logger(
    filepath: Optional[Union[str, Path]] = None,
    level: Level = logging.WARNING,
    fmt: str = _FMT,
    datefmt: str = _DATEFMT,
    mode: str = "a",
    encoding: str = "utf-8",
    console: bool = True,
) -> logging.Logger:
    """
    Replace the handlers of the cyclechar logger.

    Args:
        filepath: Optional log file; parent directories are created.
        level: Level name ("DEBUG") or number.
        fmt, datefmt: Record and date formats.
        mode: 'a' appends to the log file, 'w' truncates it.
        encoding: Log file encoding.
        console: Also log to stderr.
    """
    level = _level(level)
    formatter = logging.Formatter(fmt, datefmt=datefmt)
    logger.handlers.clear()
    logger.setLevel(level)
    if filepath is not None:
        path = Path(filepath)
        path.parent.mkdir(parents=True, exist_ok=True)
        _attach(logging.FileHandler(path, mode=mode, encoding=encoding), level, formatter)
    if console:
        _attach(logging.StreamHandler(sys.stderr), level, formatter)
    if not logger.handlers:
        logger.addHandler(logging.NullHandler())
    return logger


def add_console_handler(level: Level = logging.INFO, fmt: Optional[str] = None) -> logging.Logger:
    """A stderr handler next to the existing ones; file logging stays in place."""
    _attach(logging.StreamHandler(sys.stderr), _level(level), logging.Formatter(fmt or _FMT, datefmt=_DATEFMT))
    if logger.level == logging.NOTSET or logger.level > _level(level):
        logger.setLevel(_level(level))
    return logger


@contextmanager
def timed(message: str, *args: Any) -> Iterator[None]:
    """Log `message % args` at DEBUG with the elapsed wall time."""
    start = time.monotonic()
    try:
        yield
    finally:
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(message + " (%.1fms)", *args, (time.monotonic() - start) * 1000)
