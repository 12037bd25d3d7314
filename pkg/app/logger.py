# app/logger.py

import logging
from logging import Logger
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from logfmter import Logfmter
from concurrent_log_handler import ConcurrentRotatingFileHandler as RFH

CONSOLE_FMT = "%(asctime)s [FULL] %(levelname)s: %(message)s"
DATE_FMT = "%Y-%m-%d %H:%M:%S"

_logfmt_handler: Optional[logging.Handler] = None


def logfmt_handler(
        path: Path = Path("logs/logfmt.log"),
        max_bytes: int = 5 * 1024 * 1024,
        backup_count: int = 3,
) -> logging.Handler:
    """
    Shared logfmt handler (ts= level= logger= msg=) for log shippers.
    Multi-process safe, so worker pools can write to the same file.
    """
    global _logfmt_handler
    if _logfmt_handler is None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fmt = Logfmter(
            keys=["ts", "level", "logger", "msg"],
            mapping={"ts": "asctime", "level": "levelname",
                     "logger": "name", "msg": "message"},
        )
        _logfmt_handler = RFH(str(path), maxBytes=max_bytes,
                              backupCount=backup_count, encoding="utf-8")
        _logfmt_handler.setFormatter(fmt)
    return _logfmt_handler


def setup_logging(
        log_dir: Path = Path("logs"),
        console: bool = True,
        console_level: int = logging.INFO,
        max_bytes: int = 5 * 1024 * 1024,
        backup_count: int = 3,
):
    """
    Root -> console + application.log, FULL -> full.log (DEBUG),
    IMPORTANT -> important.log (INFO, not propagated). Second call is a no-op.
    """
    root = logging.getLogger()

    if root.handlers:  # already configured
        return logging.getLogger("FULL"), logging.getLogger("IMPORTANT")

    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    root.setLevel(logging.DEBUG)
    shipper = logfmt_handler(log_dir / "logfmt.log", max_bytes, backup_count)

    # --- console + application.log ---
    if console:
        console_h = logging.StreamHandler()
        console_h.setLevel(console_level)
        console_h.setFormatter(logging.Formatter(CONSOLE_FMT, DATE_FMT))
        root.addHandler(console_h)
    root.addHandler(shipper)
    app_h = RotatingFileHandler(log_dir / "application.log", maxBytes=max_bytes,
                                backupCount=backup_count, encoding="utf-8")
    app_h.setLevel(logging.INFO)
    app_h.setFormatter(logging.Formatter(CONSOLE_FMT, DATE_FMT))
    root.addHandler(app_h)

    # --- FULL ---
    full_h = RotatingFileHandler(log_dir / "full.log", maxBytes=max_bytes,
                                 backupCount=backup_count, encoding="utf-8")
    full_h.setFormatter(logging.Formatter(CONSOLE_FMT, DATE_FMT))

    full_logger = logging.getLogger("FULL")
    full_logger.setLevel(logging.DEBUG)
    full_logger.addHandler(full_h)
    full_logger.propagate = False
    full_logger.addHandler(shipper)

    # --- IMPORTANT ---
    imp_h = RotatingFileHandler(log_dir / "important.log", maxBytes=max_bytes,
                                backupCount=backup_count, encoding="utf-8")
    imp_h.setFormatter(logging.Formatter(
        "%(asctime)s [IMPORTANT] %(message)s", DATE_FMT
    ))

    important_logger = logging.getLogger("IMPORTANT")
    important_logger.setLevel(logging.INFO)
    important_logger.addHandler(imp_h)
    important_logger.addHandler(shipper)
    if console:
        important_console = logging.StreamHandler()
        important_console.setFormatter(logging.Formatter(
            "%(asctime)s [IMPORTANT] %(message)s", DATE_FMT
        ))
        important_logger.addHandler(important_console)
    important_logger.propagate = False

    return full_logger, important_logger


def add_file_logger(
        name: str,
        path: Path,
        level: int = logging.INFO,
        max_bytes: int = 5 * 1024 * 1024,
        backup_count: int = 3,
        fmt: str = "%(asctime)s %(levelname)s: %(message)s",
        datefmt: str = DATE_FMT,
) -> Logger:
    """
    Creates (or returns) the rotating file logger `name` writing to `path`.
    Used for the per-experiment run log.
    """
    path.parent.mkdir(parents=True, exist_ok=True)

    lg = logging.getLogger(name)
    if lg.handlers:
        return lg

    lg.setLevel(level)
    fh = RotatingFileHandler(
        path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8"
    )
    fh.setLevel(level)
    fh.setFormatter(logging.Formatter(fmt, datefmt))
    lg.addHandler(fh)
    # keep out of root
    lg.propagate = False
    return lg
