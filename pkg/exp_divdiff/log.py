"""
Logging setup for the expdd command line.

Library modules only create `logging.getLogger(__name__)` loggers. The CLI
calls `configure_logging` once; records go to stderr through rich, so stdout
stays clean for jsonl output.
"""

import logging

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "exp_divdiff"


def configure_logging(verbose=False):
    """
    Attach a RichHandler on stderr to the package logger.

    Args:
        verbose (bool): DEBUG when True, WARNING otherwise.

    Returns:
        logging.Logger: the package logger.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    logger.propagate = False
    return logger
