"""
Exceptions raised by pantograph.

Every error carries a human readable ``detail`` and the process ``exit_code``
the command line front end reports for it. The exit codes are a stable
contract: 0 ok, 1 usage/parse, 2 domain, 3 truncation, 4 rectangle escape.
"""


class PantographError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UsageError(PantographError):
    exit_code = 1


class ExpressionError(UsageError):
    def __init__(self, detail: str, position: int):
        super().__init__(f"{detail} at position {position}")
        self.position = position


class DomainError(PantographError, ValueError):
    """a precondition or theorem hypothesis does not hold"""

    exit_code = 2


class SeriesRangeError(DomainError):
    def __init__(self, detail: str, index: int):
        super().__init__(f"{detail} (series index m={index})")
        self.index = index


class BlowUpError(DomainError):
    def __init__(self, detail: str, last_good_x: float):
        super().__init__(f"{detail} (last finite state at x={last_good_x!r})")
        self.last_good_x = last_good_x


class TruncationError(PantographError):
    exit_code = 3

    def __init__(self, detail: str, tail_bound: float):
        super().__init__(f"{detail} (achieved tail bound {tail_bound!r})")
        self.tail_bound = tail_bound


class ConvergenceError(PantographError):
    exit_code = 3

    def __init__(self, detail: str, increment_norm: float):
        super().__init__(f"{detail} (last increment norm {increment_norm!r})")
        self.increment_norm = increment_norm


class RectangleEscapeError(PantographError):
    exit_code = 4
