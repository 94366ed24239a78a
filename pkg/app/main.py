"""
Connectivity Pipeline - command-line entry point
EEG functional connectivity classification: synthesize, preprocess, estimate
connectivity, classify and report.
"""

import sys
from typing import List, Optional

from loguru import logger

from app.cli import dispatch
from app.config import settings
from app.exceptions import EXIT_RUNTIME, EXIT_VALIDATION, ConfigValidationError, PipelineError

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def configure_logging(level: Optional[str] = None) -> None:
    """Route loguru to stderr so stdout stays free for results."""
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level or settings.log_level)


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()

    # ============= EXCEPTION HANDLERS =============
    try:
        return dispatch(argv)
    except ConfigValidationError as e:
        logger.error(e.detail)
        return EXIT_VALIDATION
    except PipelineError as e:
        logger.error(e.detail)
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
