from __future__ import annotations
from datetime import datetime
from core.config import settings
import logging
import os

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: str | None = None, log_dir: str | None = None) -> str | None:
    """Configure root logging for an entry point; returns the log file path if one is used."""
    level = level or settings.log_level
    log_dir = log_dir if log_dir is not None else settings.log_dir

    handlers: list[logging.Handler] = [logging.StreamHandler()]
    log_filename = None
    if log_dir:
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        log_filename = os.path.join(log_dir, f"shotfrugal_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log")
        handlers.append(logging.FileHandler(log_filename, encoding="utf-8"))

    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, handlers=handlers, force=True)
    if log_filename:
        logging.getLogger(__name__).info(f"Logging to file: {log_filename}")
    return log_filename
