# src/utils.py
import logging
import math
import os
from typing import Iterable, List, Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """Configure logging for the application

    Messages go to stderr (and optionally a file) so tables written to
    stdout stay byte-exact.
    """
    level = level or os.getenv("MONEY_MULTIPLIER_LOG_LEVEL", "WARNING")
    log_file = log_file or os.getenv("MONEY_MULTIPLIER_LOG_FILE")
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger("money_multiplier")


def ensure_directories(paths: Iterable[str]) -> None:
    """Create parent directories of output files"""
    for path in paths:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)


def format_float(value: Optional[float]) -> str:
    """Shortest round-trip decimal, empty for absent values"""
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return repr(float(value))


def format_significant(value: float, digits: int = 17) -> str:
    """Decimal with a fixed number of significant digits"""
    return f"{value:.{digits}g}"


def parse_override(text: str) -> tuple:
    """Split a `key=value` command-line override"""
    if "=" not in text:
        raise ValueError(f"override '{text}' is not of the form key=value")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()
