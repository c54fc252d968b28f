"""Logging configuration for the qchain CLI.

Routes all library logs to a rotating file; stdout stays reserved for reports.
Verbose mode adds a minimal stderr sink.
"""

from __future__ import annotations

import sys
from pathlib import Path

from loguru import logger

from qchain.config import get_log_file

_configured = False


def configure_logging(verbose: bool = False, log_file: Path | None = None) -> Path | None:
    """Configure loguru sinks once per process.

    Args:
        verbose: If True, also log INFO+ to stderr with minimal formatting.
        log_file: File sink path. Defaults to ``QCHAIN_LOG_FILE`` or the ``logging.file`` config key.

    Returns:
        The file sink path, or None if logging was already configured.
    """
    global _configured

    if _configured:
        return None

    logger.remove()

    path = log_file or get_log_file()
    logger.add(
        path,
        rotation="1 day",
        retention="1 week",
        level="DEBUG",
    )

    if verbose:
        logger.add(
            sys.stderr,
            level="INFO",
            format="<dim>{time:HH:mm:ss}</dim> | {message}",
        )

    _configured = True
    return path


def reset_logging() -> None:
    """Reset logging configuration (for testing)."""
    global _configured
    logger.remove()
    _configured = False
