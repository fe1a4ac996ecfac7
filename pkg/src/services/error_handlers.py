import logging
from typing import Tuple

from pydantic import ValidationError

from schemas.output import ErrorReport
from src.services.errors import DomainError, InvariantError, ShapeError, SizeError, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_INTERNAL = 4


def handle_command_error(command: str, error: Exception) -> Tuple[int, ErrorReport]:
    """
    Maps an exception raised while running a CLI command to its exit code.

    Args:
        command: The subcommand name (e.g., "simulate" or "sweep") for logging
        error: The exception that occurred

    Returns:
        The exit code and an ErrorReport describing the failure
    """
    if isinstance(error, (UsageError, SizeError)):
        code = EXIT_USAGE
        message = str(error)
    elif isinstance(error, ValidationError):
        # pydantic input models: one line per failing field
        code = EXIT_USAGE
        message = "; ".join(
            f"{'.'.join(str(p) for p in e['loc']) or 'input'}: {e['msg']}" for e in error.errors()
        )
    elif isinstance(error, DomainError):
        code = EXIT_DOMAIN
        message = str(error)
    elif isinstance(error, (InvariantError, ShapeError)):
        code = EXIT_INTERNAL
        message = str(error)
        logger.error(f"{command}: internal check failed: {error}")
    else:
        # Catch truly unexpected errors and log them for debugging
        logger.error(f"Unexpected error in {command}: {error}", exc_info=True)
        code = EXIT_INTERNAL
        message = f"Unexpected error: {type(error).__name__}: {error}"

    return code, ErrorReport(error=type(error).__name__, message=message, exit_code=code)
