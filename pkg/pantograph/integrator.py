"""
Fixed step RK4 march for y'(x) = sum_i a_i y(q_i x), y(0) = 1.

Because q_i x <= x, every delayed value lies in the part of the solution that
is already known: accepted nodes are kept with their slopes and read back by
cubic Hermite interpolation. The undelayed term (q_0 = 1) is an ordinary RK4
stage term. Early on a delayed argument q_i t can still fall inside the step
being taken; it is predicted from the last slope and then corrected with a
Hermite cubic through the tentative step end.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from pantograph.delay_spec import DelaySpec
from pantograph.errors import BlowUpError, DomainError
from pantograph.grid import GridSolution
from pantograph.series import evaluate

logger = logging.getLogger(__name__)

CORRECTOR_PASSES = 3


def hermite(theta: float, h: float, y0: float, dy0: float, y1: float, dy1: float) -> float:
    """cubic Hermite interpolant on [x, x + h] at x + theta h"""
    t2 = theta * theta
    t3 = t2 * theta
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + theta) * h * dy0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * dy1
    )


class History:
    """
    Accepted nodes (x_k = k h, y_k, y'_k) of the march with dense output.
    Queries beyond the last accepted node are refused: nothing is extrapolated.
    """

    def __init__(self, step: float, y0: float, slope0: float):
        self.step = step
        self._values: List[float] = [y0]
        self._slopes: List[float] = [slope0]

    @property
    def last_x(self) -> float:
        return (len(self._values) - 1) * self.step

    @property
    def values(self) -> List[float]:
        return self._values

    @property
    def slopes(self) -> List[float]:
        return self._slopes

    def accept(self, value: float, slope: float):
        self._values.append(value)
        self._slopes.append(slope)

    def lookup(self, s: float) -> float:
        if not 0.0 <= s <= self.last_x:
            raise ValueError(f"dense output queried at {s!r} outside [0, {self.last_x!r}]")
        if len(self._values) == 1:
            return self._values[0]
        j = min(int(s / self.step), len(self._values) - 2)
        theta = s / self.step - j
        return hermite(
            theta,
            self.step,
            self._values[j],
            self._slopes[j],
            self._values[j + 1],
            self._slopes[j + 1],
        )


class _Step:
    """the step [x, x + h] being taken, with an optional tentative end point"""

    def __init__(self, history: History):
        self.history = history
        self.x = history.last_x
        self.y = history.values[-1]
        self.slope = history.slopes[-1]
        self.end: Optional[Tuple[float, float]] = None
        self.inside_step = False

    def value(self, s: float) -> float:
        if s <= self.x:
            return self.history.lookup(s)
        self.inside_step = True
        if self.end is None:
            return self.y + (s - self.x) * self.slope
        h = self.history.step
        return hermite((s - self.x) / h, h, self.y, self.slope, *self.end)


class _Marcher:
    def __init__(self, spec: DelaySpec, step: float):
        self.a0 = spec.a[0]
        self.delayed = list(zip(spec.a[1:], spec.q[1:]))
        self.history = History(step, 1.0, spec.total)

    def slope(self, t: float, y: float, current: _Step) -> float:
        return self.a0 * y + math.fsum(ai * current.value(qi * t) for ai, qi in self.delayed)

    def _rk4(self, current: _Step) -> float:
        h = self.history.step
        x, y = current.x, current.y
        k1 = current.slope
        k2 = self.slope(x + h / 2, y + h / 2 * k1, current)
        k3 = self.slope(x + h / 2, y + h / 2 * k2, current)
        k4 = self.slope(x + h, y + h * k3, current)
        return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def advance(self):
        current = _Step(self.history)
        x_next = current.x + self.history.step
        y_next = self._rk4(current)
        if current.inside_step:
            for _ in range(CORRECTOR_PASSES):
                current.end = (y_next, self.slope(x_next, y_next, current))
                y_next = self._rk4(current)
            current.end = (y_next, self.slope(x_next, y_next, current))
        slope_next = self.slope(x_next, y_next, current)
        if not (math.isfinite(y_next) and math.isfinite(slope_next)):
            raise BlowUpError("RK4 state is not finite", current.x)
        self.history.accept(y_next, slope_next)


def integrate(spec: DelaySpec, b: float, h: float) -> GridSolution:
    """
    Marches from y(0) = 1 to x = b in N = ceil(b / h) equal steps of b / N, so the
    step actually used is h or slightly smaller. Global error is O(h^4).

    :raises BlowUpError: the state becomes non-finite
    """
    if not (math.isfinite(b) and b > 0):
        raise DomainError(f"interval end b must be positive, got {b!r}")
    if not (h > 0 and h <= b / 16):
        raise DomainError(f"step h must lie in (0, b/16], got {h!r}")
    N = max(16, math.ceil(b / h - 1e-9))
    marcher = _Marcher(spec, b / N)
    for _ in range(N):
        marcher.advance()
    logger.debug("RK4 with %d steps reached y(%r) = %r", N, b, marcher.history.values[-1])
    return GridSolution(b=b, N=N, values=np.asarray(marcher.history.values))


def convergence_order(spec: DelaySpec, b: float, steps: int = 32) -> float:
    """
    Observed order log2(|y_h(b) - R(b)| / |y_{h/2}(b) - R(b)|) with h = b / steps.
    Returns +inf when either error vanishes (the order is then undefined).
    """
    reference = evaluate(spec, b).value
    coarse = abs(integrate(spec, b, b / steps).at_end() - reference)
    fine = abs(integrate(spec, b, b / (2 * steps)).at_end() - reference)
    if coarse == 0.0 or fine == 0.0:
        return math.inf
    return math.log2(coarse / fine)
