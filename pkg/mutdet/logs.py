"""logs.py

Provides logging utilities.
"""

from typing import Any, Optional
import logging
import pathlib

import tqdm

try:
    import colorlog
    use_colors = True
except ImportError:  # pragma: no cover
    use_colors = False


LEVEL_PREFIX = {
    'DEBUG': 'd',
    'INFO': '+',
    'WARNING': '!',
    'ERROR': '-',
    'CRITICAL': 'x'
}

LOG_COLORS = {
    'DEBUG': 'white,bold',
    'INFO': 'green,bold',
    'WARNING': 'yellow,bold',
    'ERROR': 'red,bold',
    'CRITICAL': 'red,bold',
}

FILE_FORMAT = '{asctime!s} [{levelshortname!s}] {name!s}: {message!s}'


class PrefixFormatter(logging.Formatter):
    def format(self, record: Any) -> str:
        record.levelshortname = LEVEL_PREFIX[record.levelname]
        return super().format(record)


class ProgressAwareHandler(logging.StreamHandler):
    """Stream handler that does not tear through active tqdm progress bars"""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.tqdm.write(self.format(record), file=self.stream)
            self.flush()
        except Exception:  # pragma: no cover
            self.handleError(record)


def _stream_formatter() -> logging.Formatter:
    if use_colors:
        class ColoredPrefixFormatter(colorlog.ColoredFormatter):
            def format(self, record: Any, *args: Any) -> Any:
                record.levelshortname = LEVEL_PREFIX[record.levelname]
                return super().format(record, *args)

        fmt = ' {log_color!s}[{levelshortname!s}]{reset!s} {message!s}'
        return ColoredPrefixFormatter(fmt, log_colors=LOG_COLORS, style='{')

    return PrefixFormatter(' [{levelshortname!s}] {message!s}', style='{')


def set_logger(level: str, catch_warnings: bool = False,
               logfile: Optional[pathlib.Path] = None) -> logging.Logger:
    """Initialize loggers

    Messages go to stderr; if ``logfile`` is given, they are also appended there
    without colors and with timestamps.
    """
    level = level.upper()

    package_logger = logging.getLogger('mutdet')
    package_logger.setLevel(level)

    handlers: list = []

    ch = ProgressAwareHandler()
    ch.setFormatter(_stream_formatter())
    handlers.append(ch)

    if logfile is not None:
        fh = logging.FileHandler(str(logfile), mode='a', encoding='utf-8')
        fh.setFormatter(PrefixFormatter(FILE_FORMAT, style='{'))
        handlers.append(fh)

    for old_handler in package_logger.handlers:
        if old_handler not in handlers:
            old_handler.close()

    package_logger.handlers = handlers

    if catch_warnings:
        logging.captureWarnings(True)
        warnings_logger = logging.getLogger('py.warnings')
        warnings_logger.handlers = [ch]
        warnings_logger.setLevel(level)

    return package_logger
