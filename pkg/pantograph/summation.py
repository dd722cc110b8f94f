import sys

UNIT_ROUNDOFF = sys.float_info.epsilon / 2


class CompensatedSum:
    """
    Running sum with Neumaier's compensation term.

    Terms of an alternating series (mixed-sign coefficients) cancel heavily, so the
    low-order bits lost by each addition are collected in ``carry`` and added back
    when the value is read. ``magnitude`` tracks sum(|term|) so callers can bound
    the remaining rounding error by ``rounding_bound``.

    >>> acc = CompensatedSum()
    >>> for term in (1.0, 1e100, 1.0, -1e100):
    ...     acc += term
    >>> acc.value
    2.0
    """

    __slots__ = ("total", "carry", "magnitude", "count")

    def __init__(self):
        self.total = 0.0
        self.carry = 0.0
        self.magnitude = 0.0
        self.count = 0

    def __iadd__(self, term: float):
        t = self.total + term
        if abs(self.total) >= abs(term):
            self.carry += (self.total - t) + term
        else:
            self.carry += (term - t) + self.total
        self.total = t
        self.magnitude += abs(term)
        self.count += 1
        return self

    @property
    def value(self) -> float:
        return self.total + self.carry

    @property
    def rounding_bound(self) -> float:
        return 2 * UNIT_ROUNDOFF * self.magnitude

    def __repr__(self):
        return f"CompensatedSum({self.value!r}, terms={self.count})"
