import logging
from typing import TextIO

from pydantic import ValidationError

from pantograph.errors import DomainError, PantographError
from pantograph.report import ErrorReport

logger = logging.getLogger(__name__)


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, PantographError):
        return exc.exit_code
    if isinstance(exc, ValidationError):
        # invalid DelaySpec / FrozenDelays / Window: a violated domain invariant
        return DomainError.exit_code
    raise exc


def pantograph_exception_handler(exc: Exception, stream: TextIO, as_json: bool) -> int:
    """
    Renders a PantographError (or a pydantic ValidationError raised while building
    domain models) as an ErrorReport so that json output still carries
    'status': 'error', and returns the process exit code.

    Anything else is a bug and is re-raised.
    """
    exit_code = exit_code_for(exc)
    error = ErrorReport.from_exc(exc, exit_code=exit_code)
    logger.debug("command failed with exit code %d: %s", exit_code, error.detail)
    if as_json:
        stream.write(error.json() + "\n")
    else:
        stream.write(f"error: {error.detail}\n")
    return exit_code
