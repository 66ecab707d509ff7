"""
Logging configuration
"""

import logging
import os
from datetime import datetime
from ..config.settings import config

THREADED_FORMAT = "%(asctime)s - %(threadName)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(log_level: str = None, logs_dir: str = None) -> logging.Logger:
    """
    Setup logging for a harness run

    The console shows `log_level`; the dated file under `logs_dir` always keeps
    INFO progress (or finer), so a quiet console still leaves a record of the run.
    Thread names are added to the format when sweeps run on several workers.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        logs_dir: Directory of the log file (config.harness.logs_dir by default)

    Returns:
        The package logger
    """
    if log_level is None:
        log_level = config.log_level
    if logs_dir is None:
        logs_dir = config.harness.logs_dir
    console_level = getattr(logging, log_level.upper())
    file_level = min(console_level, logging.INFO)

    os.makedirs(logs_dir, exist_ok=True)
    log_filename = os.path.join(logs_dir, f"cone_dbar_{datetime.now().strftime('%Y%m%d')}.log")

    log_format = THREADED_FORMAT if config.harness.workers > 1 else config.log_format
    file_handler = logging.FileHandler(log_filename)
    file_handler.setLevel(file_level)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(console_level)

    logging.basicConfig(level=file_level, format=log_format,
                        handlers=[file_handler, console_handler], force=True)

    logger = logging.getLogger('cone_dbar')
    logger.info(f"Logging initialized - console {log_level.upper()}, file {logging.getLevelName(file_level)} "
                f"({log_filename})")
    return logger
