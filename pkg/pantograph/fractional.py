"""
Fractional order companion of R: the Caputo equation

    D^alpha y(x) = sum_i a_i y(q_i x),  y(0) = 1

is solved by R_alpha(a;q;x) = sum_m x^(alpha m) / Gamma(alpha m + 1) * (a;q)_{alpha,m}
with (a;q)_{alpha,m} = prod_{j<m} sum_i a_i q_i^(alpha j). The Mittag-Leffler function
E_alpha is both the n = 0 case and the envelope of R_alpha for non-negative a_i.
"""
import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import validator
from scipy.special import gammaln

from pantograph.base_model import FrozenModel
from pantograph.delay_spec import DelaySpec
from pantograph.errors import DomainError, SeriesRangeError, TruncationError
from pantograph.series import (
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    CoefficientStream,
    SeriesValue,
    stopping_threshold,
)
from pantograph.summation import CompensatedSum

logger = logging.getLogger(__name__)

_LOG_MAX = 709.0


class FractionalOrder(FrozenModel):
    """
    Caputo order alpha > 0. Series evaluation accepts any positive order; the L1
    residual check is only valid for 0 < alpha < 1.
    """

    alpha: float

    @validator("alpha")
    def _positive(cls, alpha):
        if not (math.isfinite(alpha) and alpha > 0):
            raise ValueError(f"alpha must be a positive finite number, got {alpha!r}")
        return alpha

    @property
    def supports_residual(self) -> bool:
        return 0.0 < self.alpha < 1.0


OrderLike = Union[FractionalOrder, float]


def as_order(alpha: OrderLike) -> FractionalOrder:
    if isinstance(alpha, FractionalOrder):
        return alpha
    if not (math.isfinite(alpha) and alpha > 0):
        raise DomainError(f"alpha must be a positive finite number, got {alpha!r}")
    return FractionalOrder(alpha=alpha)


class FracCoefficientStream(CoefficientStream):
    """(a;q)_{alpha,m}: advancing from m multiplies by sum_i a_i q_i^(alpha m)"""

    def __init__(self, spec: DelaySpec, alpha: OrderLike):
        self.alpha = as_order(alpha)
        super().__init__(spec, spec.ratios**self.alpha.alpha)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0"""
    if not (math.isfinite(x) and x > 0):
        raise DomainError(f"log_gamma needs a positive finite argument, got {x!r}")
    return float(gammaln(x))


def mittag_leffler_tail(s: float, alpha: float, m: int) -> float:
    """
    Bound on sum_{k>m} s^k / Gamma(alpha k + 1) for s >= 0.

    ln Gamma is convex, so the term ratio s * Gamma(alpha k + 1) / Gamma(alpha k + alpha + 1)
    never increases with k: the tail is dominated by a geometric series with the
    first discarded ratio. Returns inf while that ratio is still >= 1.
    """
    if s == 0.0:
        return 0.0
    log_s = math.log(s)
    next_log_gamma = gammaln(alpha * (m + 1) + 1)
    log_ratio = log_s + next_log_gamma - gammaln(alpha * (m + 2) + 1)
    if log_ratio >= 0.0:
        return math.inf
    ratio = math.exp(log_ratio)
    log_first = (m + 1) * log_s - next_log_gamma
    if log_first > _LOG_MAX:
        return math.inf
    return math.exp(log_first) / (1.0 - ratio)


def _signed_exp(log_magnitude: float, sign: float, index: int) -> float:
    if log_magnitude > _LOG_MAX:
        raise SeriesRangeError("series term overflowed", index)
    return math.copysign(math.exp(log_magnitude), sign)


def mittag_leffler(
    alpha: OrderLike,
    x: float,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """E_alpha(x) = sum_m x^m / Gamma(alpha m + 1), terms assembled in log space"""
    a = as_order(alpha).alpha
    if tol is not None and not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if not math.isfinite(x):
        raise DomainError(f"argument must be finite, got {x!r}")
    if x == 0:
        return SeriesValue(value=1.0, terms_used=1, tail_bound=0.0)

    log_abs_x = math.log(abs(x))
    acc = CompensatedSum()
    tail = math.inf
    for m in range(max_terms):
        sign = -1.0 if (x < 0 and m % 2) else 1.0
        acc += _signed_exp(m * log_abs_x - gammaln(a * m + 1), sign, m)
        tail = mittag_leffler_tail(abs(x), a, m)
        if tail <= stopping_threshold(tol, acc.value):
            return SeriesValue(value=acc.value, terms_used=m + 1, tail_bound=tail)
    raise TruncationError(f"tolerance {tol!r} not reached within {max_terms} terms", tail)


def evaluate_fractional(
    spec: DelaySpec,
    alpha: OrderLike,
    x: float,
    tol: Optional[float] = None,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> SeriesValue:
    """
    R_alpha(a;q;x) for x >= 0.

    x^(alpha m) is taken as exp(alpha m ln x) and every term is assembled in log
    space, so A^m x^(alpha m) may exceed the float range while the term does not.
    The tail is bounded by the E_alpha majorant with argument A x^alpha.
    """
    order = as_order(alpha)
    a = order.alpha
    if tol is not None and not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if not (math.isfinite(x) and x >= 0):
        raise DomainError(f"R_alpha is evaluated on x >= 0 only, got {x!r}")
    if x == 0:
        return SeriesValue(value=1.0, terms_used=1, tail_bound=0.0)

    log_x = math.log(x)
    majorant = spec.abs_sum * math.exp(a * log_x)
    stream = FracCoefficientStream(spec, order)
    acc = CompensatedSum()
    tail = math.inf
    for m in range(max_terms):
        c = stream.product
        if c != 0.0:
            acc += _signed_exp(math.log(abs(c)) + a * m * log_x - gammaln(a * m + 1), c, m)
        tail = mittag_leffler_tail(majorant, a, m)
        if tail <= stopping_threshold(tol, acc.value):
            logger.debug("R_%g at x=%r: %d terms, tail bound %.3e", a, x, m + 1, tail)
            return SeriesValue(value=acc.value, terms_used=m + 1, tail_bound=tail)
        stream.advance()
    raise TruncationError(f"tolerance {tol!r} not reached within {max_terms} terms", tail)


def fractional_sandwich_bounds(
    spec: DelaySpec, alpha: OrderLike, x: float, tol: Optional[float] = None
) -> Tuple[float, float]:
    """(E_alpha(a_0 x^alpha), E_alpha((sum_i a_i) x^alpha)) for a_i >= 0 and x >= 0"""
    a = as_order(alpha).alpha
    for i, ai in enumerate(spec.a):
        if ai < 0:
            raise DomainError(f"sandwich bounds need a[{i}] >= 0, got {ai!r}")
    if x < 0:
        raise DomainError(f"sandwich bounds need x >= 0, got {x!r}")
    x_alpha = x**a
    lower = mittag_leffler(a, spec.a[0] * x_alpha, tol)
    upper = mittag_leffler(a, spec.total * x_alpha, tol)
    return lower.value, upper.value


def caputo_l1_residual(
    spec: DelaySpec,
    alpha: OrderLike,
    b: float,
    N: int,
    tol: float = DEFAULT_TOL,
    *,
    start_fraction: float = 0.25,
) -> float:
    """
    Checks D^alpha y = sum_i a_i y(q_i x) for y = R_alpha on a uniform grid of [0, b].

    D^alpha is discretised by the L1 scheme
        D^alpha y(x_k) ~ h^-alpha / Gamma(2 - alpha) * sum_{j<k} w_j (y_{k-j} - y_{k-j-1}),
        w_j = (j + 1)^(1 - alpha) - j^(1 - alpha),
    while every y(q_i x_k) comes straight from the series. The largest
    discrepancy over the nodes x_k >= start_fraction * b is returned; it decays
    like N^-(2 - alpha).

    Nodes next to x = 0 are excluded: y has an x^alpha component there, and
    the L1 error at a fixed node index does not shrink with h.
    """
    order = as_order(alpha)
    a = order.alpha
    if not order.supports_residual:
        raise DomainError(
            f"the L1 residual needs 0 < alpha < 1, got {a!r}; "
            "for alpha = 1 check the ODE residual with evaluate_derivative"
        )
    if not b > 0:
        raise DomainError(f"interval end b must be positive, got {b!r}")
    if N < 16:
        raise DomainError(f"grid size N must be at least 16, got {N}")
    if not 0.0 <= start_fraction < 1.0:
        raise DomainError(f"start_fraction must lie in [0, 1), got {start_fraction!r}")

    nodes = np.linspace(0.0, b, N + 1)
    h = b / N

    def solution(x: float) -> float:
        return evaluate_fractional(spec, order, x, tol).value

    y = np.array([solution(x) for x in nodes])
    j = np.arange(N, dtype=float)
    weights = (j + 1.0) ** (1.0 - a) - j ** (1.0 - a)
    scale = math.exp(-a * math.log(h) - gammaln(2.0 - a))
    # derivative[k - 1] approximates D^alpha y(x_k), k = 1..N
    derivative = scale * np.convolve(weights, np.diff(y))[:N]

    start = max(1, math.ceil(start_fraction * N))
    residual = 0.0
    for k in range(start, N + 1):
        delayed = [y[k]] + [solution(qi * nodes[k]) for qi in spec.q[1:]]
        rhs = math.fsum(ai * yi for ai, yi in zip(spec.a, delayed))
        residual = max(residual, abs(derivative[k - 1] - rhs))
    logger.debug("L1 residual for alpha=%g, N=%d: %.3e", a, N, residual)
    return residual
