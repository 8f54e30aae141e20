"""
Logging configuration for rholab.

Records go to stderr so stdout stays reserved for JSON reports. Events logged
while a harness check runs carry its check_id and suite through structlog
contextvars.
"""

import logging
import os
import sys
from contextlib import contextmanager
from typing import Iterator, Optional

import structlog
from structlog.contextvars import bound_contextvars, merge_contextvars

LOG_LEVEL_ENV = "RHOLAB_LOG_LEVEL"
DEFAULT_LEVEL = "WARNING"


def resolve_level(level: Optional[str] = None) -> str:
    """Explicit level, else $RHOLAB_LOG_LEVEL, else WARNING."""
    return (level or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LEVEL).upper()


def setup_logging(level: Optional[str] = None, json_format: bool = False) -> None:
    """
    Route structlog through the stdlib root logger on stderr.

    Args:
        level: DEBUG, INFO, WARNING or ERROR; None reads $RHOLAB_LOG_LEVEL
        json_format: One sorted-key JSON object per line instead of console text
    """
    log_level = getattr(logging, resolve_level(level), logging.WARNING)
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=log_level, force=True)

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_format
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


@contextmanager
def check_context(check_id: str, suite: str) -> Iterator[None]:
    """Bind check_id and suite to every event logged in this thread until exit."""
    with bound_contextvars(check_id=check_id, suite=suite):
        yield
