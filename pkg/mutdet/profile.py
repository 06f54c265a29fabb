"""profile.py

Context managers for performance tracing.
"""

from typing import Iterator

import contextlib
import logging
import time

from mutdet import get_settings

logger = logging.getLogger(__name__)


@contextlib.contextmanager
def trace(description: str) -> Iterator[None]:
    """Log the wall-clock time spent in the wrapped block if profiling is enabled.

    Works both as context manager and as function decorator.
    """
    settings = get_settings()
    if not settings.PROFILE:
        yield
        return

    start = time.perf_counter()
    try:
        yield
    finally:
        logger.debug('%s took %.4f s', description, time.perf_counter() - start)
