"""日志工具 | logging helpers.

stdout carries command output only, so every handler writes to stderr or
to an optional log file.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Optional, Union


class RunLogger:
    """Semantic wrapper used by the runner for stage-level messages."""

    def __init__(self, logger: logging.Logger) -> None:
        self.logger = logger

    def startup(self, command: str) -> None:
        self.logger.info("starting %s", command)

    def config_loaded(self) -> None:
        self.logger.debug("configuration loaded")

    def stage(self, name: str) -> None:
        self.logger.info("stage: %s", name)

    def result_ready(self, kind: str, count: Optional[int] = None) -> None:
        if count is None:
            self.logger.info("%s ready", kind)
        else:
            self.logger.info("%s ready (%s items)", kind, count)

    def output_saved(self, path: str) -> None:
        self.logger.info("output written to %s", path)

    def error_occurred(self, error: Union[str, BaseException]) -> None:
        self.logger.error("failed: %s", error)

    def completion(self) -> None:
        self.logger.debug("done")

    def debug(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.logger.debug(message, *args, **kwargs)

    def info(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.logger.info(message, *args, **kwargs)

    def warning(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.logger.warning(message, *args, **kwargs)

    def error(self, message: str, *args: Any, **kwargs: Any) -> None:
        self.logger.error(message, *args, **kwargs)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


def setup_logging(
    level: Union[str, int, bool] = "INFO",
    log_file: Optional[str] = None,
) -> RunLogger:
    """Configure root logging and return the runner's semantic logger."""
    if isinstance(level, bool):
        numeric_level = logging.DEBUG if level else logging.INFO
    elif isinstance(level, str):
        numeric_level = getattr(logging, level.upper(), logging.INFO)
    else:
        numeric_level = int(level)

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        target = Path(log_file).expanduser()
        target.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(target))

    logging.basicConfig(
        level=numeric_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )

    base_logger = logging.getLogger("tropical_collapse")
    base_logger.debug("Logging configured (level=%s)", numeric_level)
    return RunLogger(base_logger)
